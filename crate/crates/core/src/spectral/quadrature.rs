use num_complex::Complex64;
use std::f64::consts::PI;

use super::grid::FrequencyGrid;
use super::kernel::KernelSpec;
use super::weights::{Piece, WeightTransform};
use crate::error::{Error, Result};

const RESYNC: usize = 64;

fn check_lengths(logvals: &[Complex64], grid: &FrequencyGrid) -> Result<()> {
    if logvals.len() != grid.len() {
        return Err(Error::Config(format!(
            "{} log values for a grid of {} points",
            logvals.len(),
            grid.len()
        )));
    }
    Ok(())
}

/// Real part, imaginary residual and `Σ|terms|` of a spectral integral, all
/// scaled by `(2πΔ)⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralSum {
    pub real: f64,
    pub imag: f64,
    pub magnitude: f64,
}

impl SpectralSum {
    /// `|imag| / max(|real|, 10⁻⁴ Σ|terms|)`.
    pub fn residual(&self) -> f64 {
        let denom = self.real.abs().max(1e-4 * self.magnitude);
        if denom == 0.0 {
            return 0.0;
        }
        self.imag.abs() / denom
    }
}

/// Complex Simpson sum behind [`spectral_integral`], with terms at `±u_k`
/// added pairwise.
pub fn spectral_sum(
    weight: &WeightTransform,
    logvals: &[Complex64],
    grid: &FrequencyGrid,
    kernel: &KernelSpec,
    h: f64,
    delta: f64,
) -> Result<SpectralSum> {
    check_lengths(logvals, grid)?;
    let term = |i: usize| {
        let u = grid.point(i);
        grid.simpson_weight(i) * weight.ft_neg(u) * logvals[i] * kernel.ft(h * u)
    };
    let c = grid.center();
    let first = term(c);
    let mut total = first;
    let mut magnitude = first.norm();
    for k in 1..=grid.half_count {
        let (plus, minus) = (term(c + k), term(c - k));
        magnitude += plus.norm() + minus.norm();
        total += plus + minus;
    }
    let scale = 1.0 / (2.0 * PI * delta);
    Ok(SpectralSum { real: total.re * scale, imag: total.im * scale, magnitude: magnitude * scale })
}

/// `(2πΔ)⁻¹ ∫ 𝓕f(−u) L(u) 𝓕K(hu) du` by composite Simpson on `grid`.
///
/// The imaginary residual must vanish up to rounding.
pub fn spectral_integral(
    weight: &WeightTransform,
    logvals: &[Complex64],
    grid: &FrequencyGrid,
    kernel: &KernelSpec,
    h: f64,
    delta: f64,
) -> Result<f64> {
    let s = spectral_sum(weight, logvals, grid, kernel, h, delta)?;
    if s.residual() > 1e-8 {
        return Err(Error::SymmetryViolation { real: s.real, imag: s.imag });
    }
    Ok(s.real)
}

/// Precomputed `G_k = w_k L(u_k) 𝓕K(hu_k) / (2πΔ)` on the non-negative half of
/// a conjugate-symmetric log path, for fast evaluation of many interval weights.
#[derive(Debug, Clone)]
pub struct SpectralPath {
    grid: FrequencyGrid,
    g: Vec<Complex64>,
    /// `G_k / (i u_k)`; entry 0 unused.
    g_over_iu: Vec<Complex64>,
}

impl SpectralPath {
    pub fn new(logvals: &[Complex64], grid: &FrequencyGrid, kernel: &KernelSpec, h: f64, delta: f64) -> Result<Self> {
        check_lengths(logvals, grid)?;
        let c = grid.center();
        let largest = logvals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut worst = logvals[c].im.abs();
        for k in 1..=grid.half_count {
            worst = worst.max((logvals[c - k] - logvals[c + k].conj()).norm());
        }
        if worst > 1e-8 * largest.max(1e-300) {
            return Err(Error::SymmetryViolation { real: largest, imag: worst });
        }
        let scale = 1.0 / (2.0 * PI * delta);
        let g: Vec<Complex64> = (0..=grid.half_count)
            .map(|k| {
                let i = c + k;
                let u = grid.point(i);
                grid.simpson_weight(i) * logvals[i] * kernel.ft(h * u) * scale
            })
            .collect();
        let g_over_iu = g
            .iter()
            .enumerate()
            .map(|(k, v)| if k == 0 { Complex64::new(0.0, 0.0) } else { v / Complex64::new(0.0, k as f64 * grid.step) })
            .collect();
        Ok(Self { grid: *grid, g, g_over_iu })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// `2 Re Σ_{k≥1} G_k e^{−iu_k a} / (iu_k)`.
    pub fn tail(&self, a: f64) -> f64 {
        let step = Complex64::cis(-self.grid.step * a);
        let mut rot = Complex64::new(1.0, 0.0);
        let mut acc = 0.0;
        for k in 1..self.g_over_iu.len() {
            if k % RESYNC == 1 {
                rot = Complex64::cis(-(k as f64) * self.grid.step * a);
            } else {
                rot *= step;
            }
            let v = self.g_over_iu[k];
            acc += v.re * rot.re - v.im * rot.im;
        }
        2.0 * acc
    }

    /// Spectral integral of `1_{[a, b]}`.
    pub fn interval(&self, a: f64, b: f64) -> f64 {
        self.interval_with_tails(a, b, self.tail(a), self.tail(b))
    }

    /// As [`interval`](Self::interval), with endpoint tails already computed.
    pub fn interval_with_tails(&self, a: f64, b: f64, tail_a: f64, tail_b: f64) -> f64 {
        self.g[0].re * (b - a) + tail_a - tail_b
    }

    pub fn integral(&self, weight: &WeightTransform) -> f64 {
        weight
            .pieces
            .iter()
            .map(|p| match *p {
                Piece::Interval { a, b, coef } => coef * self.interval(a, b),
                Piece::Odd { .. } => {
                    let mut acc = (self.g[0] * p.ft_neg(0.0)).re;
                    for k in 1..self.g.len() {
                        acc += 2.0 * (self.g[k] * p.ft_neg(k as f64 * self.grid.step)).re;
                    }
                    acc
                }
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::config::Hyperparameters;
    use crate::spectral::unwrap::distinguished_log;
    use crate::spectral::weights::{weight_transform, WeightKind};

    fn hp() -> Hyperparameters {
        Hyperparameters { n: 1000, atom_spacing: 1.0, bandwidth: 0.001, window: 0.1, truncation: 5.5, q_window: 3.0 }
    }

    fn two_atom_log(grid: &FrequencyGrid) -> Vec<Complex64> {
        // 𝓕μ for μ = 0.7 δ_{1} + 0.3 δ_{−2}
        grid.points().map(|u| 0.7 * Complex64::cis(u) + 0.3 * Complex64::cis(-2.0 * u)).collect()
    }

    #[test]
    fn zero_log_gives_zero() {
        let h = hp();
        let k = KernelSpec::default();
        let g = FrequencyGrid::for_hyperparameters(&h, 16.0).unwrap();
        let w = weight_transform(WeightKind::Lambda, &h, &k).unwrap();
        let l = vec![Complex64::new(0.0, 0.0); g.len()];
        assert_eq!(spectral_integral(&w, &l, &g, &k, h.bandwidth, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn recovers_measure_of_interval() {
        let h = hp();
        let k = KernelSpec::default();
        let g = FrequencyGrid::for_hyperparameters(&h, 16.0).unwrap();
        let l = two_atom_log(&g);
        let path = SpectralPath::new(&l, &g, &k, h.bandwidth, 1.0).unwrap();
        for (a, b, expected) in [(0.5, 1.5, 0.7), (-2.5, 1.5, 1.0), (-2.5, -1.5, 0.3), (1.5, 4.0, 0.0)] {
            let w = WeightTransform { pieces: vec![Piece::Interval { a, b, coef: 1.0 }] };
            let direct = spectral_integral(&w, &l, &g, &k, h.bandwidth, 1.0).unwrap();
            assert!((direct - expected).abs() < 1e-6, "[{a},{b}]: {direct}");
            assert!((path.interval(a, b) - direct).abs() < 1e-11);
            assert!((path.integral(&w) - direct).abs() < 1e-11);
        }
    }

    #[test]
    fn poisson_intensity_recovered() {
        let h = hp();
        let k = KernelSpec::default();
        let g = FrequencyGrid::for_hyperparameters(&h, 16.0).unwrap();
        let delta = 0.7;
        let l: Vec<_> = g.points().map(|u| delta * 2.0 * (Complex64::cis(u) - 1.0)).collect();
        let w = weight_transform(WeightKind::Lambda, &h, &k).unwrap();
        let lam = spectral_integral(&w, &l, &g, &k, h.bandwidth, delta).unwrap();
        assert!((lam - 2.0).abs() < 1e-5, "{lam}");
    }

    #[test]
    fn asymmetric_log_rejected() {
        let h = hp();
        let k = KernelSpec::default();
        let g = FrequencyGrid::new(20.0, 0.1).unwrap();
        let l: Vec<_> = g.points().map(|u| Complex64::new(u.sin(), 0.0)).collect();
        let w = WeightTransform { pieces: vec![Piece::Interval { a: 0.5, b: 1.5, coef: 1.0 }] };
        assert!(matches!(spectral_integral(&w, &l, &g, &k, h.bandwidth, 1.0), Err(Error::SymmetryViolation { .. })));
        assert!(matches!(SpectralPath::new(&l, &g, &k, h.bandwidth, 1.0), Err(Error::SymmetryViolation { .. })));
    }

    #[test]
    fn conjugate_symmetry_residual_small_for_every_weight() {
        let h = hp();
        let k = KernelSpec::default();
        let g = FrequencyGrid::for_hyperparameters(&h, 16.0).unwrap();
        let phi: Vec<_> = g.points().map(|u| (0.4 * (Complex64::cis(u) + Complex64::cis(-u) - 2.0) + Complex64::new(0.0, 0.3 * u)).exp()).collect();
        let l = distinguished_log(&phi, &g, 1e-3).unwrap();
        for kind in [WeightKind::Lambda, WeightKind::Gamma, WeightKind::Qj { j: 1 }, WeightKind::Q, WeightKind::N { t: 0.4 }] {
            let w = weight_transform(kind, &h, &k).unwrap();
            let mut total = Complex64::new(0.0, 0.0);
            let mut size = 0.0;
            for (i, u) in g.points().enumerate() {
                let t = g.simpson_weight(i) * w.ft_neg(u) * l[i] * k.ft(h.bandwidth * u);
                total += t;
                size += t.norm();
            }
            assert!(total.im.abs() < 1e-8 * total.re.abs().max(1e-4 * size), "{kind:?}: {total}");
        }
    }

    #[test]
    fn halving_step_is_stable() {
        let h = hp();
        let k = KernelSpec::default();
        let coarse = FrequencyGrid::for_hyperparameters(&h, 16.0).unwrap();
        let fine = coarse.refined();
        let logf = |g: &FrequencyGrid| -> Vec<Complex64> {
            g.points().map(|u| 0.5 * (Complex64::cis(u) + Complex64::cis(-u) - 2.0) + 0.2 * (Complex64::cis(2.5 * u) - 1.0)).collect()
        };
        for kind in [WeightKind::Lambda, WeightKind::Qj { j: 1 }, WeightKind::Q, WeightKind::N { t: 1.0 }, WeightKind::N { t: 2.3 }] {
            let w = weight_transform(kind, &h, &k).unwrap();
            let a = spectral_integral(&w, &logf(&coarse), &coarse, &k, h.bandwidth, 1.0).unwrap();
            let b = spectral_integral(&w, &logf(&fine), &fine, &k, h.bandwidth, 1.0).unwrap();
            assert!((a - b).abs() < 1e-6 * b.abs().max(1e-3), "{kind:?}: {a} vs {b}");
        }
    }
}
