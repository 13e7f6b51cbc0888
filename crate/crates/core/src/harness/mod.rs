//! Experiment engine behind the command line: Monte Carlo runs, bands and
//! report files.

pub mod bands;
pub mod io;
pub mod stats;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{covariance_matrix, default_grid, limit_laws, LimitWeight, DEFAULT_SERIES_TOL};
use crate::error::{Error, Result};
use crate::estimators::{SpectralEstimator, Target};
use crate::model::{simulate, LevyTriple, ModelSpec};
use crate::spectral::SpectralConfig;
use io::ErrorRow;
use stats::{ks_standard_normal, mean, two_sided_z, variance, KsResult};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest tolerated share of refused replicates.
pub const MAX_REFUSED_SHARE: f64 = 0.2;

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_level() -> f64 {
    0.95
}

fn default_tol() -> f64 {
    DEFAULT_SERIES_TOL
}

fn check_schema(found: u32) -> Result<()> {
    if found != SCHEMA_VERSION {
        return Err(Error::Config(format!("unsupported schema_version {found}, expected {SCHEMA_VERSION}")));
    }
    Ok(())
}

/// Settings of the `estimate` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub delta: f64,
    pub atom_spacing: f64,
    #[serde(default)]
    pub spectral: SpectralConfig,
    /// Evaluation points of `N̂`/`F̂`; 41 points over `[−5ε, 5ε]` when absent.
    #[serde(default)]
    pub ts: Option<Vec<f64>>,
    #[serde(default)]
    pub isotonic: bool,
}

impl EstimateConfig {
    pub fn validate(&self) -> Result<()> {
        check_schema(self.schema_version)?;
        self.spectral.validate()
    }

    pub fn grid(&self) -> Vec<f64> {
        self.ts.clone().unwrap_or_else(|| default_grid(self.atom_spacing))
    }
}

/// Settings of the `oracle` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    #[serde(default)]
    pub ts: Option<Vec<f64>>,
    #[serde(default = "default_tol")]
    pub series_tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { schema_version: SCHEMA_VERSION, ts: None, series_tol: DEFAULT_SERIES_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub model: ModelSpec,
    pub sample_sizes: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default)]
    pub config: SpectralConfig,
    pub targets: Vec<Target>,
    /// Grid for the sup-norm statistic `√n sup_t |F̂(t) − F(t)|`.
    #[serde(default)]
    pub sup_grid: Option<Vec<f64>>,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default = "default_tol")]
    pub series_tol: f64,
    #[serde(default)]
    pub output_dir: Option<String>,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<LevyTriple> {
        check_schema(self.schema_version)?;
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if self.sample_sizes.is_empty() || self.sample_sizes.contains(&0) {
            return Err(Error::Config("sample_sizes must be a nonempty list of positive sizes".into()));
        }
        if self.targets.is_empty() {
            return Err(Error::Config("no targets requested".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config(format!("level must lie in (0, 1), got {}", self.level)));
        }
        self.config.validate()?;
        let triple = self.model.to_triple()?;
        for &n in &self.sample_sizes {
            let hp = self.config.hyperparameters(n, triple.atom_spacing)?;
            for t in &self.targets {
                if let Target::Qj { j } | Target::Pj { j } = *t {
                    let limit = hp.q_index_limit();
                    if j == 0 || j.abs() > limit {
                        return Err(Error::IndexOutOfWindow { index: j, limit });
                    }
                }
            }
        }
        Ok(triple)
    }

    /// `(index of n, replicate)` jobs in reporting order.
    pub fn jobs(&self) -> Vec<(usize, usize)> {
        (0..self.sample_sizes.len()).flat_map(|i| (0..self.replicates).map(move |r| (i, r))).collect()
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of one replicate at one sample size.
pub fn replicate_seed(master: u64, n: usize, replicate: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ n as u64) ^ replicate as u64)
}

pub fn limit_weight(target: Target) -> Option<LimitWeight> {
    Some(match target {
        Target::Lambda => LimitWeight::Lambda,
        Target::Qj { j } => LimitWeight::Qj { j },
        Target::Pj { j } => LimitWeight::Pj { j },
        Target::Q => LimitWeight::Q,
        Target::P => LimitWeight::P,
        Target::N { t } => LimitWeight::N { t },
        Target::F { t } => LimitWeight::F { t },
        Target::Gamma | Target::NaiveLambda => return None,
    })
}

/// Asymptotic variance of `√n(θ̂ − θ)` for each target (`None` for the drift).
pub fn oracle_variances(targets: &[Target], triple: &LevyTriple, delta: f64, tol: f64) -> Result<Vec<Option<f64>>> {
    let laws = limit_laws(triple, delta, tol)?;
    let weights: Vec<LimitWeight> = targets.iter().filter_map(|t| limit_weight(*t)).collect();
    let m = covariance_matrix(&weights, triple, &laws, delta)?;
    let no_jump = laws.p.atom(0);
    let mut k = 0;
    Ok(targets
        .iter()
        .map(|t| match t {
            Target::Gamma => None,
            Target::NaiveLambda => Some((1.0 - no_jump) / (no_jump * delta * delta)),
            _ => {
                k += 1;
                Some(m[k - 1][k - 1])
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSummary {
    pub target: Target,
    pub label: String,
    pub n: usize,
    pub truth: f64,
    /// Multiplier applied to `θ̂ − θ`: `√n`, or `√n/h_n` for the drift.
    pub scale: f64,
    pub used: usize,
    pub refused: usize,
    pub mean_estimate: f64,
    /// Monte Carlo standard error of `mean_estimate`.
    pub mc_standard_error: f64,
    /// `(mean_estimate − truth) / mc_standard_error`.
    pub bias_in_se: f64,
    pub mean_scaled_error: f64,
    pub variance_scaled_error: f64,
    pub oracle_variance: Option<f64>,
    /// Empirical over oracle variance.
    pub variance_ratio: Option<f64>,
    pub ks: Option<KsResult>,
    pub ks_degenerate: bool,
    /// Share of `|scaled error| ≤ z·σ` at the report level.
    pub coverage: Option<f64>,
    pub normalized_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupNormSummary {
    pub n: usize,
    pub samples: Vec<f64>,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCReport {
    pub schema_version: u32,
    pub replicates: usize,
    pub seed: u64,
    pub level: f64,
    pub sample_sizes: Vec<usize>,
    pub targets: Vec<TargetSummary>,
    pub sup_norm: Vec<SupNormSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MCRun {
    pub report: MCReport,
    pub errors: Vec<ErrorRow>,
}

/// Outcome of one replicate: per target an estimate or a refusal.
struct Replicate {
    values: Vec<Option<f64>>,
    sup: Option<f64>,
}

fn run_replicate(plan: &ExperimentPlan, triple: &LevyTriple, n: usize, seed: u64) -> Result<Replicate> {
    let delta = plan.model.delta;
    let sample = simulate(triple, delta, n, seed)?;
    let est = match SpectralEstimator::from_sample(&sample, triple.atom_spacing, &plan.config) {
        Ok(e) => e,
        Err(e) if e.is_refusal() => {
            return Ok(Replicate { values: vec![None; plan.targets.len()], sup: None });
        }
        Err(e) => return Err(e),
    };
    let mut values = Vec::with_capacity(plan.targets.len());
    for &t in &plan.targets {
        match est.estimate(t) {
            Ok(v) => values.push(Some(v)),
            Err(e) if e.is_refusal() => values.push(None),
            Err(e) => return Err(e),
        }
    }
    let sup = match &plan.sup_grid {
        Some(ts) => match est.f_values(ts) {
            Ok(f) => Some(ts.iter().zip(f).map(|(&t, v)| (v - triple.jump_cdf(t)).abs()).fold(0.0, f64::max) * (n as f64).sqrt()),
            Err(e) if e.is_refusal() => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    Ok(Replicate { values, sup })
}

/// Runs every `(n, replicate)` job, in parallel on the current rayon pool,
/// and summarises in replicate order.
pub fn run_montecarlo(plan: &ExperimentPlan) -> Result<MCRun> {
    let triple = plan.validate()?;
    let delta = plan.model.delta;
    let oracle = oracle_variances(&plan.targets, &triple, delta, plan.series_tol)?;
    let jobs = plan.jobs();
    let results: Vec<Result<Replicate>> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let n = plan.sample_sizes[i];
            run_replicate(plan, &triple, n, replicate_seed(plan.seed, n, r))
        })
        .collect();
    let mut outcomes = Vec::with_capacity(results.len());
    for r in results {
        outcomes.push(r?);
    }

    let z = two_sided_z(plan.level);
    let mut summaries = Vec::new();
    let mut rows = Vec::new();
    let mut sup_norm = Vec::new();
    for (i, &n) in plan.sample_sizes.iter().enumerate() {
        let block = &outcomes[i * plan.replicates..(i + 1) * plan.replicates];
        let hp = plan.config.hyperparameters(n, triple.atom_spacing)?;
        for (k, &target) in plan.targets.iter().enumerate() {
            let truth = target.truth(&triple, Some(&hp));
            let scale = match target {
                Target::Gamma => (n as f64).sqrt() / hp.bandwidth,
                _ => (n as f64).sqrt(),
            };
            let mut estimates = Vec::new();
            for (r, rep) in block.iter().enumerate() {
                if let Some(v) = rep.values[k] {
                    estimates.push(v);
                    rows.push(ErrorRow { replicate: r, target: target.label(), n, error: v - truth });
                }
            }
            let refused = plan.replicates - estimates.len();
            if refused as f64 > MAX_REFUSED_SHARE * plan.replicates as f64 {
                return Err(Error::TooManyRefusals { refused, total: plan.replicates });
            }
            let scaled: Vec<f64> = estimates.iter().map(|v| scale * (v - truth)).collect();
            let sd = oracle[k].filter(|v| *v > 0.0).map(f64::sqrt);
            let normalized: Vec<f64> = match sd {
                Some(s) => scaled.iter().map(|e| e / s).collect(),
                None => Vec::new(),
            };
            let ks_degenerate = normalized.len() < 2;
            let mean_estimate = mean(&estimates);
            let mc_se = (variance(&estimates) / estimates.len() as f64).sqrt();
            let var_scaled = variance(&scaled);
            summaries.push(TargetSummary {
                target,
                label: target.label(),
                n,
                truth,
                scale,
                used: estimates.len(),
                refused,
                mean_estimate,
                mc_standard_error: mc_se,
                bias_in_se: (mean_estimate - truth) / mc_se,
                mean_scaled_error: mean(&scaled),
                variance_scaled_error: var_scaled,
                oracle_variance: oracle[k],
                variance_ratio: oracle[k].map(|o| var_scaled / o),
                ks: if ks_degenerate { None } else { ks_standard_normal(&normalized) },
                ks_degenerate,
                coverage: sd.map(|_| normalized.iter().filter(|e| e.abs() <= z).count() as f64 / normalized.len().max(1) as f64),
                normalized_errors: normalized,
            });
        }
        if plan.sup_grid.is_some() {
            let samples: Vec<f64> = block.iter().filter_map(|r| r.sup).collect();
            sup_norm.push(SupNormSummary { n, mean: mean(&samples), samples });
        }
    }
    Ok(MCRun {
        report: MCReport {
            schema_version: SCHEMA_VERSION,
            replicates: plan.replicates,
            seed: plan.seed,
            level: plan.level,
            sample_sizes: plan.sample_sizes.clone(),
            targets: summaries,
            sup_norm,
        },
        errors: rows,
    })
}

/// Runs the plan on a dedicated pool of `threads` workers (all cores when absent).
pub fn run_montecarlo_with_threads(plan: &ExperimentPlan, threads: Option<usize>) -> Result<MCRun> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| run_montecarlo(plan))
}
