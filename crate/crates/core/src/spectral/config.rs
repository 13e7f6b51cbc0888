//! Tuning schedules: bandwidth `h_n`, atom window `ε_n`, truncation `H_n`
//! and the summation window `H̃_n` of the total discrete mass.

use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use crate::error::{Error, Result};

/// `constant · g(n^exponent)` for the `g` fixed by each schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub exponent: f64,
    pub constant: f64,
}

impl Schedule {
    pub const fn new(exponent: f64, constant: f64) -> Self {
        Self { exponent, constant }
    }

    fn power(&self, n: usize) -> f64 {
        (n as f64).powf(self.exponent)
    }
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralConfig {
    /// `h_n = c_h · exp(−n^{ϑ_h})`.
    pub bandwidth: Schedule,
    /// `ε_n = c_ε · exp(−n^{ϑ_ε})`.
    pub window: Schedule,
    /// `H_n = c_H · exp(n^{ϑ_H})`, snapped to the nearest lattice midpoint.
    pub truncation: Schedule,
    /// `H̃_n = c_H̃ · n^{ϑ_H̃}`.
    pub q_window: Schedule,
    pub kernel: KernelSpec,
    /// Quadrature points per period of the fastest weight oscillation.
    pub oversampling: f64,
    /// Lower bound on `|φ_n|`; derived from the naive intensity when absent.
    pub kappa: Option<f64>,
    /// Declared regularity exponent of the absolutely continuous part.
    pub alpha: f64,
    /// Declared logarithmic moment order.
    pub beta: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            bandwidth: Schedule::new(0.20, DEFAULT_BANDWIDTH_CONSTANT),
            window: Schedule::new(0.10, 1.0),
            truncation: Schedule::new(0.15, 1.0),
            q_window: Schedule::new(0.25, 1.0),
            kernel: KernelSpec::default(),
            oversampling: 16.0,
            kappa: None,
            alpha: 6.0,
            beta: 4.0,
        }
    }
}

/// Default multiplier of the bandwidth schedule.
pub const DEFAULT_BANDWIDTH_CONSTANT: f64 = 0.1;

/// Values of the schedules at a given sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub n: usize,
    pub atom_spacing: f64,
    pub bandwidth: f64,
    pub window: f64,
    pub truncation: f64,
    pub q_window: f64,
}

impl Hyperparameters {
    /// Largest `|j|` entering the total discrete mass estimate.
    pub fn q_index_limit(&self) -> i64 {
        (self.q_window / self.atom_spacing + 1e-9).floor() as i64
    }

    /// Largest `|j|` with `ε|j| < H_n`.
    pub fn n_index_limit(&self) -> i64 {
        (self.truncation / self.atom_spacing).floor() as i64
    }
}

/// Which sets of hyperparameter constraints hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    /// Constraints for the intensity, drift, atom weights, N and F.
    pub marginal: bool,
    /// Additional constraints covering the total discrete mass.
    pub joint: bool,
    pub violations: Vec<String>,
}

impl SpectralConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, s) in [
            ("bandwidth", self.bandwidth),
            ("window", self.window),
            ("truncation", self.truncation),
            ("q_window", self.q_window),
        ] {
            if !(s.constant.is_finite() && s.constant > 0.0 && s.exponent.is_finite() && s.exponent > 0.0) {
                return Err(Error::Config(format!("{name} schedule must have positive constant and exponent")));
            }
        }
        if !(self.oversampling.is_finite() && self.oversampling >= 2.0) {
            return Err(Error::Config(format!("oversampling must be >= 2, got {}", self.oversampling)));
        }
        if let Some(k) = self.kappa {
            if !(k.is_finite() && (0.0..1.0).contains(&k)) {
                return Err(Error::Config(format!("kappa must lie in [0, 1), got {k}")));
            }
        }
        let regimes = self.regimes();
        if !regimes.marginal {
            return Err(Error::Config(format!(
                "hyperparameter exponents violate the marginal constraints: {}",
                regimes.violations.join("; ")
            )));
        }
        Ok(())
    }

    pub fn regimes(&self) -> RegimeReport {
        let (th, te, tbig, tq) = (
            self.bandwidth.exponent,
            self.window.exponent,
            self.truncation.exponent,
            self.q_window.exponent,
        );
        let mut violations = Vec::new();
        let check = |ok: bool, what: String, v: &mut Vec<String>| {
            if !ok {
                v.push(what);
            }
            ok
        };
        let mut marginal = true;
        marginal &= check(1.0 / self.alpha < 2.0 * te, format!("1/alpha < 2 theta_eps ({} vs {})", 1.0 / self.alpha, 2.0 * te), &mut violations);
        marginal &= check(2.0 * te <= th, format!("2 theta_eps <= theta_h ({} vs {th})", 2.0 * te), &mut violations);
        marginal &= check(th < 0.25, format!("theta_h < 1/4 (theta_h = {th})"), &mut violations);
        marginal &= check(1.0 / (2.0 * self.beta) <= tbig, format!("1/(2 beta) <= theta_H ({} vs {tbig})", 1.0 / (2.0 * self.beta)), &mut violations);
        marginal &= check(tbig < th, format!("theta_H < theta_h ({tbig} vs {th})"), &mut violations);

        let mut joint = true;
        joint &= check(1.0 / (2.0 * self.beta) <= tq && tq < 0.5, format!("1/(2 beta) <= theta_Htilde < 1/2 (theta_Htilde = {tq})"), &mut violations);
        joint &= check(2.0 / self.alpha < 2.0 * te, format!("2/alpha < 2 theta_eps ({} vs {})", 2.0 / self.alpha, 2.0 * te), &mut violations);
        joint &= check(2.0 * te <= th && th < (1.0 - 2.0 * tq) / 4.0, format!("theta_h < (1 - 2 theta_Htilde)/4 ({th} vs {})", (1.0 - 2.0 * tq) / 4.0), &mut violations);
        joint &= check(tbig > 0.0 && tbig < th, format!("0 < theta_H < theta_h ({tbig} vs {th})"), &mut violations);

        RegimeReport { marginal, joint: joint && marginal, violations }
    }

    /// Schedules evaluated at `n`, with `H_n` snapped to `ε(m + 1/2)`.
    pub fn hyperparameters(&self, n: usize, atom_spacing: f64) -> Result<Hyperparameters> {
        if n == 0 {
            return Err(Error::Config("sample size must be positive".into()));
        }
        if !(atom_spacing.is_finite() && atom_spacing > 0.0) {
            return Err(Error::Config(format!("atom_spacing must be positive, got {atom_spacing}")));
        }
        let bandwidth = self.bandwidth.constant * (-self.bandwidth.power(n)).exp();
        let window = self.window.constant * (-self.window.power(n)).exp();
        let raw_truncation = self.truncation.constant * self.truncation.power(n).exp();
        let q_window = self.q_window.constant * self.q_window.power(n);
        if window >= 0.5 * atom_spacing {
            return Err(Error::Config(format!(
                "atom window {window} must be below half the lattice pitch {atom_spacing}"
            )));
        }
        let m = (raw_truncation / atom_spacing - 0.5).round().max(0.0);
        let truncation = atom_spacing * (m + 0.5);
        if bandwidth <= 0.0 || !bandwidth.is_finite() {
            return Err(Error::Config(format!("bandwidth underflowed at n = {n}")));
        }
        Ok(Hyperparameters { n, atom_spacing, bandwidth, window, truncation, q_window })
    }
}
