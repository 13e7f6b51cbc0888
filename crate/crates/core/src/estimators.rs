//! Spectral estimators of λ, γ, the atom weights, N and F, and the naive
//! intensity baseline.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{IncrementSample, LevyTriple};
use crate::spectral::config::{Hyperparameters, RegimeReport, SpectralConfig};
use crate::spectral::ecf::{ecf_half, mirror};
use crate::spectral::grid::FrequencyGrid;
use crate::spectral::unwrap::distinguished_log;
use crate::spectral::weights::{lambda_intervals, n_weight_intervals, q_indices, qj_interval, weight_transform, WeightKind};
use crate::spectral::SpectralPath;

/// `|λ̂|` below which ratios by `λ̂` are refused.
pub const MIN_LAMBDA: f64 = 1e-8;

/// Fallback `κ` when the naive intensity is undefined.
pub const FALLBACK_KAPPA: f64 = 1e-4;

/// `−Δ⁻¹ log` of the fraction of increments equal to `γΔ`.
pub fn naive_lambda(values: &[f64], delta: f64, gamma_hint: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let centre = gamma_hint * delta;
    let tol = 1e-12 * centre.abs().max(1.0);
    let hits = values.iter().filter(|z| (**z - centre).abs() <= tol).count();
    (hits > 0).then(|| -(hits as f64 / values.len() as f64).ln() / delta)
}

/// Most frequent value among those occurring at least twice.
pub fn modal_value(values: &[f64]) -> Option<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best: Option<(f64, usize)> = None;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let count = j - i;
        if count >= 2 && best.is_none_or(|(_, c)| count > c) {
            best = Some((sorted[i], count));
        }
        i = j;
    }
    best.map(|(v, _)| v)
}

/// Naive intensity with the drift guessed from the most repeated increment.
pub fn naive_lambda_auto(sample: &IncrementSample) -> Option<f64> {
    let mode = modal_value(&sample.values)?;
    naive_lambda(&sample.values, sample.delta, mode / sample.delta)
}

/// Linearisation remainder relative to a reference model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainderDiagnostic {
    /// `sup_u |φ_n(u)/φ(u) − 1|` over `|u| ≤ 1/h_n`.
    pub sup_ratio_deviation: f64,
    /// `sup_u max{1, |φ/φ_n|²} |φ_n/φ − 1|²`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub hyperparameters: Hyperparameters,
    pub regimes: RegimeReport,
    pub grid: FrequencyGrid,
    pub kappa: f64,
    /// `min_u |φ_n(u)|`; absent for an injected log path.
    pub min_modulus: Option<f64>,
    /// `min |φ_n| / κ`.
    pub kappa_margin: Option<f64>,
    pub naive_lambda: Option<f64>,
    pub remainder: Option<RemainderDiagnostic>,
}

/// Quantities estimable from one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "target", rename_all = "snake_case")]
pub enum Target {
    Lambda,
    Gamma,
    Qj { j: i64 },
    Pj { j: i64 },
    Q,
    P,
    N { t: f64 },
    F { t: f64 },
    NaiveLambda,
}

impl Target {
    pub fn label(&self) -> String {
        match self {
            Target::Lambda => "lambda".into(),
            Target::Gamma => "gamma".into(),
            Target::Qj { j } => format!("q[{j}]"),
            Target::Pj { j } => format!("p[{j}]"),
            Target::Q => "q".into(),
            Target::P => "p".into(),
            Target::N { t } => format!("N({t})"),
            Target::F { t } => format!("F({t})"),
            Target::NaiveLambda => "naive_lambda".into(),
        }
    }

    /// Value of the target under the true model.
    pub fn truth(&self, triple: &LevyTriple, hp: Option<&Hyperparameters>) -> f64 {
        match *self {
            Target::Lambda | Target::NaiveLambda => triple.lambda,
            Target::Gamma => triple.gamma,
            Target::Qj { j } => triple.discrete_weights.get(&j).copied().unwrap_or(0.0),
            Target::Pj { j } => triple.p_j(j),
            Target::Q => match hp {
                Some(hp) => q_indices(hp).iter().map(|j| triple.discrete_weights.get(j).copied().unwrap_or(0.0)).sum(),
                None => triple.discrete_mass(),
            },
            Target::P => Target::Q.truth(triple, hp) / triple.lambda,
            Target::N { t } => triple.levy_cdf(t),
            Target::F { t } => triple.jump_cdf(t),
        }
    }
}

/// A right-continuous step-like function reported on a grid, with the
/// locations and sizes of its jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    pub points: Vec<(f64, f64)>,
    pub jumps: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSet {
    pub n: usize,
    pub delta: f64,
    pub lambda_hat: f64,
    pub gamma_hat: f64,
    pub q_hat: BTreeMap<i64, f64>,
    pub p_hat: BTreeMap<i64, f64>,
    pub q_total_hat: f64,
    pub p_total_hat: f64,
    pub n_hat: StepFunction,
    pub f_hat: StepFunction,
    /// Monotone projection of `F̂` on the grid, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_hat_isotonic: Option<Vec<f64>>,
    pub diagnostics: Diagnostics,
}

/// Estimators built on one log path `L(u)` of the increment characteristic
/// function.
#[derive(Debug, Clone)]
pub struct SpectralEstimator {
    config: SpectralConfig,
    hp: Hyperparameters,
    delta: f64,
    grid: FrequencyGrid,
    path: SpectralPath,
    /// `φ_n` on the non-negative half of the grid, when built from a sample.
    ecf: Option<Vec<Complex64>>,
    kappa: f64,
    naive: Option<f64>,
}

impl SpectralEstimator {
    /// Estimator from observed increments.
    pub fn from_sample(sample: &IncrementSample, atom_spacing: f64, config: &SpectralConfig) -> Result<Self> {
        config.validate()?;
        let hp = config.hyperparameters(sample.len(), atom_spacing)?;
        let grid = FrequencyGrid::for_hyperparameters(&hp, config.oversampling)?;
        let naive = naive_lambda_auto(sample);
        let kappa = config.kappa.unwrap_or_else(|| match naive {
            Some(l) => 0.5 * (-2.0 * l * sample.delta).exp(),
            None => FALLBACK_KAPPA,
        });
        let half = ecf_half(&sample.values, &grid);
        let full = mirror(&half);
        let logs = distinguished_log(&full, &grid, kappa)?;
        let path = SpectralPath::new(&logs, &grid, &config.kernel, hp.bandwidth, sample.delta)?;
        Ok(Self { config: config.clone(), hp, delta: sample.delta, grid, path, ecf: Some(half), kappa, naive })
    }

    /// Estimator with the log path supplied directly, as if from `n` observations.
    pub fn from_log_path<F>(log: F, n: usize, delta: f64, atom_spacing: f64, config: &SpectralConfig) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        config.validate()?;
        let hp = config.hyperparameters(n, atom_spacing)?;
        let grid = FrequencyGrid::for_hyperparameters(&hp, config.oversampling)?;
        let half: Vec<Complex64> = (0..=grid.half_count).map(|k| log(k as f64 * grid.step)).collect();
        let logs = mirror(&half);
        let path = SpectralPath::new(&logs, &grid, &config.kernel, hp.bandwidth, delta)?;
        let kappa = config.kappa.unwrap_or(FALLBACK_KAPPA);
        Ok(Self { config: config.clone(), hp, delta, grid, path, ecf: None, kappa, naive: None })
    }

    /// Injects the true log characteristic function of `triple`.
    pub fn oracle(triple: &LevyTriple, n: usize, delta: f64, config: &SpectralConfig) -> Result<Self> {
        Self::from_log_path(|u| triple.log_char_fn(delta, u), n, delta, triple.atom_spacing, config)
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.hp
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn naive_lambda(&self) -> Option<f64> {
        self.naive
    }

    fn intervals(&self, iv: &[(f64, f64)], cache: &mut HashMap<u64, f64>) -> f64 {
        let mut tail = |x: f64| *cache.entry(x.to_bits()).or_insert_with(|| self.path.tail(x));
        iv.iter().map(|&(a, b)| {
            let (ta, tb) = (tail(a), tail(b));
            self.path.interval_with_tails(a, b, ta, tb)
        }).sum()
    }

    pub fn lambda(&self) -> f64 {
        self.intervals(&lambda_intervals(&self.hp), &mut HashMap::new())
    }

    pub fn gamma(&self) -> Result<f64> {
        let w = weight_transform(WeightKind::Gamma, &self.hp, &self.config.kernel)?;
        Ok(self.path.integral(&w))
    }

    fn check_q_index(&self, j: i64) -> Result<()> {
        let limit = self.hp.q_index_limit();
        if j == 0 || j.abs() > limit {
            return Err(Error::IndexOutOfWindow { index: j, limit });
        }
        Ok(())
    }

    pub fn qj(&self, j: i64) -> Result<f64> {
        self.check_q_index(j)?;
        Ok(self.intervals(&[qj_interval(j, &self.hp)], &mut HashMap::new()))
    }

    pub fn q_hat(&self) -> BTreeMap<i64, f64> {
        let mut cache = HashMap::new();
        q_indices(&self.hp).into_iter().map(|j| (j, self.intervals(&[qj_interval(j, &self.hp)], &mut cache))).collect()
    }

    pub fn q_total(&self) -> f64 {
        self.q_hat().values().sum()
    }

    fn positive_lambda(&self, lambda: f64) -> Result<f64> {
        if lambda.abs() < MIN_LAMBDA {
            return Err(Error::DivisionByNearZero { what: "lambda_hat", value: lambda });
        }
        Ok(lambda)
    }

    pub fn pj(&self, j: i64) -> Result<f64> {
        let q = self.qj(j)?;
        Ok(q / self.positive_lambda(self.lambda())?)
    }

    pub fn p_total(&self) -> Result<f64> {
        let q = self.q_total();
        Ok(q / self.positive_lambda(self.lambda())?)
    }

    /// `N̂(t)` at each `t`; `t = ±∞` allowed.
    pub fn n_values(&self, ts: &[f64]) -> Vec<f64> {
        let mut cache = HashMap::new();
        ts.iter().map(|&t| self.intervals(&n_weight_intervals(t, &self.hp), &mut cache)).collect()
    }

    pub fn n_at(&self, t: f64) -> f64 {
        self.n_values(&[t])[0]
    }

    pub fn f_values(&self, ts: &[f64]) -> Result<Vec<f64>> {
        let lambda = self.positive_lambda(self.lambda())?;
        Ok(self.n_values(ts).into_iter().map(|v| v / lambda).collect())
    }

    /// Jumps of `N̂` at lattice points `0 < |εj| < H_n`.
    pub fn n_jumps(&self) -> Vec<(f64, f64)> {
        let limit = self.hp.n_index_limit();
        let mut cache = HashMap::new();
        (-limit..=limit)
            .filter(|&j| j != 0)
            .map(|j| {
                let (a, b) = qj_interval(j, &self.hp);
                (self.hp.atom_spacing * j as f64, self.intervals(&[(a, b)], &mut cache))
            })
            .collect()
    }

    pub fn estimate(&self, target: Target) -> Result<f64> {
        match target {
            Target::Lambda => Ok(self.lambda()),
            Target::Gamma => self.gamma(),
            Target::Qj { j } => self.qj(j),
            Target::Pj { j } => self.pj(j),
            Target::Q => Ok(self.q_total()),
            Target::P => self.p_total(),
            Target::N { t } => Ok(self.n_at(t)),
            Target::F { t } => Ok(self.f_values(&[t])?[0]),
            Target::NaiveLambda => self.naive.ok_or(Error::DivisionByNearZero { what: "no-jump fraction", value: 0.0 }),
        }
    }

    /// Compares `φ_n` with the characteristic function of `reference`.
    pub fn remainder(&self, reference: &LevyTriple) -> Option<RemainderDiagnostic> {
        let ecf = self.ecf.as_ref()?;
        let mut sup = 0.0f64;
        let mut bound = 0.0f64;
        for (k, v) in ecf.iter().enumerate() {
            let phi = reference.char_fn(self.delta, k as f64 * self.grid.step);
            let ratio = v / phi;
            let dev = (ratio - 1.0).norm();
            sup = sup.max(dev);
            bound = bound.max((1.0f64).max(1.0 / ratio.norm_sqr()) * dev * dev);
        }
        Some(RemainderDiagnostic { sup_ratio_deviation: sup, bound })
    }

    pub fn diagnostics(&self, reference: Option<&LevyTriple>) -> Diagnostics {
        let min_modulus = self.ecf.as_ref().map(|e| e.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min));
        Diagnostics {
            hyperparameters: self.hp,
            regimes: self.config.regimes(),
            grid: self.grid,
            kappa: self.kappa,
            min_modulus,
            kappa_margin: min_modulus.map(|m| m / self.kappa),
            naive_lambda: self.naive,
            remainder: reference.and_then(|r| self.remainder(r)),
        }
    }

    /// Every estimate, with `N̂` and `F̂` evaluated on `ts`.
    pub fn estimate_set(&self, ts: &[f64], isotonic: bool, reference: Option<&LevyTriple>) -> Result<EstimateSet> {
        let lambda_hat = self.lambda();
        let gamma_hat = self.gamma()?;
        let q_hat = self.q_hat();
        let q_total_hat: f64 = q_hat.values().sum();
        let lambda = self.positive_lambda(lambda_hat)?;
        let p_hat = q_hat.iter().map(|(&j, &q)| (j, q / lambda)).collect();
        let n_vals = self.n_values(ts);
        let jumps = self.n_jumps();
        let f_vals: Vec<f64> = n_vals.iter().map(|v| v / lambda).collect();
        let f_hat_isotonic = isotonic.then(|| isotonic_regression(&f_vals));
        Ok(EstimateSet {
            n: self.hp.n,
            delta: self.delta,
            lambda_hat,
            gamma_hat,
            p_total_hat: q_total_hat / lambda,
            q_hat,
            p_hat,
            q_total_hat,
            n_hat: StepFunction { points: ts.iter().copied().zip(n_vals).collect(), jumps: jumps.clone() },
            f_hat: StepFunction {
                points: ts.iter().copied().zip(f_vals).collect(),
                jumps: jumps.into_iter().map(|(x, s)| (x, s / lambda)).collect(),
            },
            f_hat_isotonic,
            diagnostics: self.diagnostics(reference),
        })
    }
}

/// Pool-adjacent-violators projection onto nondecreasing sequences.
pub fn isotonic_regression(values: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, c2) = blocks[blocks.len() - 1];
            let (m1, c1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let c = c1 + c2;
            *blocks.last_mut().unwrap() = ((m1 * c1 as f64 + m2 * c2 as f64) / c as f64, c);
        }
    }
    blocks.into_iter().flat_map(|(m, c)| std::iter::repeat_n(m, c)).collect()
}
