//! Band-limited kernel defined through its Fourier transform: flat on
//! `[0, u₀]`, a quintic smoothstep taper down to zero on `[u₀, 1]`, even.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Default start of the taper.
pub const DEFAULT_TAPER_START: f64 = 0.5;

/// Nodes and weights of the Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre integral of `f` over `[a, b]` with `panels` panels.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(10);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let half = 0.5 * width;
        for (x, w) in nodes.iter().zip(&weights) {
            total += w * half * f(mid + half * x);
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct KernelParams {
    taper_start: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelParams", into = "KernelParams")]
pub struct KernelSpec {
    taper_start: f64,
    /// `c = 2(∫₀¹ K − K(1))`, the normalisation of the drift weight.
    c: f64,
}

impl TryFrom<KernelParams> for KernelSpec {
    type Error = Error;

    fn try_from(p: KernelParams) -> Result<Self> {
        KernelSpec::new(p.taper_start)
    }
}

impl From<KernelSpec> for KernelParams {
    fn from(k: KernelSpec) -> Self {
        KernelParams { taper_start: k.taper_start }
    }
}

impl Default for KernelSpec {
    fn default() -> Self {
        KernelSpec::new(DEFAULT_TAPER_START).expect("default kernel is admissible")
    }
}

impl KernelSpec {
    pub fn new(taper_start: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&taper_start) {
            return Err(Error::Config(format!("taper start must lie in [0, 1), got {taper_start}")));
        }
        let mut k = Self { taper_start, c: 0.0 };
        let c = 2.0 * (k.integral_0_1() - k.value(1.0));
        if c.abs() < 1e-6 {
            return Err(Error::KernelDegenerate(c));
        }
        k.c = c;
        Ok(k)
    }

    pub fn taper_start(&self) -> f64 {
        self.taper_start
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `𝓕K(u)`.
    pub fn ft(&self, u: f64) -> f64 {
        let a = u.abs();
        if a <= self.taper_start {
            1.0
        } else if a >= 1.0 {
            0.0
        } else {
            let t = (a - self.taper_start) / (1.0 - self.taper_start);
            1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
        }
    }

    fn taper_panels(&self, x: f64) -> usize {
        let cycles = x.abs() * (1.0 - self.taper_start) / (2.0 * PI);
        (4.0 + 2.0 * cycles).ceil() as usize
    }

    /// `K(x) = (1/π) ∫₀¹ 𝓕K(u) cos(ux) du`.
    pub fn value(&self, x: f64) -> f64 {
        let u0 = self.taper_start;
        let flat = if x.abs() < 1e-12 { u0 } else { (u0 * x).sin() / x };
        let taper = integrate(|u| self.ft(u) * (u * x).cos(), u0, 1.0, self.taper_panels(x));
        (flat + taper) / PI
    }

    /// `∫₀¹ K(x) dx = (1/π) ∫₀¹ 𝓕K(u) sin(u)/u du`.
    pub fn integral_0_1(&self) -> f64 {
        let sinc = |u: f64| if u.abs() < 1e-8 { 1.0 } else { u.sin() / u };
        integrate(|u| self.ft(u) * sinc(u), 0.0, 1.0, 16) / PI
    }

    /// `K` tabulated on `xs`.
    pub fn table(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.value(x)).collect()
    }
}
