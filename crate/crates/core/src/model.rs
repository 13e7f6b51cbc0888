//! The compound Poisson model: drift γ, intensity λ and a Lévy measure ν made
//! of lattice atoms plus an absolutely continuous part.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{DensityGrid, SignedMeasure, LATTICE_TOL};

/// Tolerance of the mass condition `Σ q_j + ∫ν_ac = λ`.
pub const MASS_TOL: f64 = 1e-10;

/// Largest Poisson mean drawn by a single inversion pass.
const POISSON_CHUNK: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyTriple {
    pub gamma: f64,
    pub lambda: f64,
    pub atom_spacing: f64,
    /// Lattice index `j` to weight `q_j` of the atom at `ε·j`.
    pub discrete_weights: BTreeMap<i64, f64>,
    pub ac_density: Option<DensityGrid>,
}

impl LevyTriple {
    /// Builds a triple and checks the structural invariants.
    pub fn new(
        gamma: f64,
        lambda: f64,
        atom_spacing: f64,
        discrete_weights: BTreeMap<i64, f64>,
        ac_density: Option<DensityGrid>,
    ) -> Result<Self> {
        let t = Self { gamma, lambda, atom_spacing, discrete_weights, ac_density };
        t.validate()?;
        Ok(t)
    }

    /// Purely discrete model; `λ` is the sum of the weights.
    pub fn discrete<I>(gamma: f64, atom_spacing: f64, weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, f64)>,
    {
        let discrete_weights: BTreeMap<i64, f64> = weights.into_iter().collect();
        let lambda = discrete_weights.values().sum();
        Self::new(gamma, lambda, atom_spacing, discrete_weights, None)
    }

    pub fn validate(&self) -> Result<()> {
        let report = validate_assumptions(self, f64::INFINITY, f64::INFINITY);
        match report.clauses.iter().find(|c| !c.passed) {
            None => Ok(()),
            Some(c) => Err(Error::Assumption(format!("{}: {}", c.name, c.detail))),
        }
    }

    pub fn discrete_mass(&self) -> f64 {
        self.discrete_weights.values().sum()
    }

    pub fn ac_mass(&self) -> f64 {
        self.ac_density.as_ref().map_or(0.0, DensityGrid::mass)
    }

    /// `p_j = q_j / λ`.
    pub fn p_j(&self, j: i64) -> f64 {
        self.discrete_weights.get(&j).copied().unwrap_or(0.0) / self.lambda
    }

    /// `p = q / λ`, the discrete share of the jump law.
    pub fn p_total(&self) -> f64 {
        self.discrete_mass() / self.lambda
    }

    /// ν as a signed measure on the lattice grid.
    pub fn levy_measure(&self) -> Result<SignedMeasure> {
        let m = SignedMeasure::from_atoms(
            self.atom_spacing,
            self.discrete_weights.iter().map(|(&j, &q)| (j, q)),
        );
        match &self.ac_density {
            Some(d) => m.with_density(d.clone()),
            None => Ok(m),
        }
    }

    /// Fourier transform `∫ e^{iux} ν(dx)`; cells of the density are
    /// integrated exactly.
    pub fn levy_transform(&self, u: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&j, &q) in &self.discrete_weights {
            acc += q * Complex64::from_polar(1.0, u * self.atom_spacing * j as f64);
        }
        if let Some(d) = &self.ac_density {
            let half = 0.5 * d.step;
            let cell = d.step * sinc(u * half);
            for (i, &v) in d.values.iter().enumerate() {
                if v != 0.0 {
                    acc += v * cell * Complex64::from_polar(1.0, u * (d.cell_left(i) + half));
                }
            }
        }
        acc
    }

    /// The distinguished logarithm `Δ(iγu + 𝓕ν(u) − λ)` of the increment
    /// characteristic function.
    pub fn log_char_fn(&self, delta: f64, u: f64) -> Complex64 {
        delta * (Complex64::new(-self.lambda, self.gamma * u) + self.levy_transform(u))
    }

    pub fn char_fn(&self, delta: f64, u: f64) -> Complex64 {
        self.log_char_fn(delta, u).exp()
    }

    /// `N(t) = ν((−∞, t])`.
    pub fn levy_cdf(&self, t: f64) -> f64 {
        if t == f64::NEG_INFINITY {
            return 0.0;
        }
        if t == f64::INFINITY {
            return self.discrete_mass() + self.ac_mass();
        }
        let cut = t / self.atom_spacing + LATTICE_TOL;
        let atoms: f64 = self
            .discrete_weights
            .iter()
            .filter(|(&j, _)| (j as f64) <= cut)
            .map(|(_, &q)| q)
            .sum();
        atoms + self.ac_density.as_ref().map_or(0.0, |d| d.integral_to(t))
    }

    /// `F(t) = N(t) / λ`.
    pub fn jump_cdf(&self, t: f64) -> f64 {
        self.levy_cdf(t) / self.lambda
    }

    /// `∫ x ν(dx)`.
    pub fn first_moment(&self) -> f64 {
        let atoms: f64 = self
            .discrete_weights
            .iter()
            .map(|(&j, &q)| q * self.atom_spacing * j as f64)
            .sum();
        let ac = self.ac_density.as_ref().map_or(0.0, |d| {
            d.values
                .iter()
                .enumerate()
                .map(|(i, &v)| v * d.step * (d.cell_left(i) + 0.5 * d.step))
                .sum()
        });
        atoms + ac
    }

    /// `∫ x² ν(dx)`.
    pub fn second_moment(&self) -> f64 {
        let atoms: f64 = self
            .discrete_weights
            .iter()
            .map(|(&j, &q)| q * (self.atom_spacing * j as f64).powi(2))
            .sum();
        let ac = self.ac_density.as_ref().map_or(0.0, |d| {
            d.values
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let (a, b) = (d.cell_left(i), d.cell_left(i) + d.step);
                    v * (b.powi(3) - a.powi(3)) / 3.0
                })
                .sum()
        });
        atoms + ac
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Characteristic function of one increment.
pub fn char_fn(triple: &LevyTriple, delta: f64, u: f64) -> Complex64 {
    triple.char_fn(delta, u)
}

pub fn true_n(triple: &LevyTriple, t: f64) -> f64 {
    triple.levy_cdf(t)
}

pub fn true_f(triple: &LevyTriple, t: f64) -> f64 {
    triple.jump_cdf(t)
}

/// JSON model description used by the command line tools.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub gamma: f64,
    pub lambda: f64,
    pub delta: f64,
    pub atom_spacing: f64,
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    #[serde(default)]
    pub ac: Option<AcSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub j: i64,
    pub q: f64,
}

/// Piecewise-constant density: `values[i]` on `[grid_origin + i·step, grid_origin + (i+1)·step)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcSpec {
    pub grid_origin: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl ModelSpec {
    pub fn to_triple(&self) -> Result<LevyTriple> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::Config(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.atom_spacing.is_finite() && self.atom_spacing > 0.0) {
            return Err(Error::Config(format!(
                "atom_spacing must be positive, got {}",
                self.atom_spacing
            )));
        }
        let mut weights = BTreeMap::new();
        for a in &self.atoms {
            *weights.entry(a.j).or_insert(0.0) += a.q;
        }
        let ac = match &self.ac {
            Some(ac) => {
                let grid = DensityGrid::from_origin(ac.grid_origin, ac.step, ac.values.clone())?;
                crate::measure::cells_per_spacing(self.atom_spacing, ac.step)?;
                Some(grid)
            }
            None => None,
        };
        LevyTriple::new(self.gamma, self.lambda, self.atom_spacing, weights, ac)
    }

    pub fn from_triple(triple: &LevyTriple, delta: f64) -> Self {
        Self {
            gamma: triple.gamma,
            lambda: triple.lambda,
            delta,
            atom_spacing: triple.atom_spacing,
            atoms: triple
                .discrete_weights
                .iter()
                .map(|(&j, &q)| AtomSpec { j, q })
                .collect(),
            ac: triple.ac_density.as_ref().map(|d| AcSpec {
                grid_origin: d.origin(),
                step: d.step,
                values: d.values.clone(),
            }),
        }
    }
}

/// Observed increments `Z_1, …, Z_n` at spacing Δ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementSample {
    pub delta: f64,
    pub values: Vec<f64>,
    pub seed: u64,
}

impl IncrementSample {
    pub fn new(delta: f64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("increment sample is empty".into()));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Config(format!("delta must be positive, got {delta}")));
        }
        if values.iter().any(|z| !z.is_finite()) {
            return Err(Error::Config("increments must be finite".into()));
        }
        Ok(Self { delta, values, seed: 0 })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Draws jumps from `F = ν/λ`.
struct JumpSampler {
    discrete_share: f64,
    atom_locations: Vec<f64>,
    atom_cdf: Vec<f64>,
    ac: Option<(DensityGrid, Vec<f64>)>,
}

impl JumpSampler {
    fn new(triple: &LevyTriple) -> Self {
        let q = triple.discrete_mass();
        let mut acc = 0.0;
        let mut atom_locations = Vec::new();
        let mut atom_cdf = Vec::new();
        for (&j, &w) in &triple.discrete_weights {
            if w > 0.0 {
                acc += w / q;
                atom_locations.push(triple.atom_spacing * j as f64);
                atom_cdf.push(acc);
            }
        }
        let ac = triple.ac_density.as_ref().and_then(|d| {
            let mass = d.mass();
            (mass > 0.0).then(|| {
                let mut cdf = Vec::with_capacity(d.len() + 1);
                let mut s = 0.0;
                cdf.push(0.0);
                for v in &d.values {
                    s += v * d.step / mass;
                    cdf.push(s);
                }
                (d.clone(), cdf)
            })
        });
        let discrete_share = if ac.is_none() { 1.0 } else { q / triple.lambda };
        Self { discrete_share, atom_locations, atom_cdf, ac }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let pick_atom = self.ac.is_none() || rng.gen::<f64>() < self.discrete_share;
        if pick_atom && !self.atom_locations.is_empty() {
            let w: f64 = rng.gen::<f64>() * self.atom_cdf.last().copied().unwrap_or(1.0);
            let i = self.atom_cdf.partition_point(|&c| c <= w).min(self.atom_locations.len() - 1);
            return self.atom_locations[i];
        }
        let (d, cdf) = self.ac.as_ref().expect("non-empty jump law");
        let w: f64 = rng.gen::<f64>() * cdf[cdf.len() - 1];
        // first cell whose upper cumulative value exceeds w
        let c = (cdf[1..].partition_point(|&c| c <= w)).min(d.len() - 1);
        let width = cdf[c + 1] - cdf[c];
        let frac = if width > 0.0 { ((w - cdf[c]) / width).clamp(0.0, 1.0) } else { 0.5 };
        d.cell_left(c) + frac * d.step
    }
}

fn poisson_by_inversion<R: Rng>(mean: f64, rng: &mut R) -> u64 {
    let mut remaining = mean;
    let mut total = 0u64;
    while remaining > 0.0 {
        let mu = remaining.min(POISSON_CHUNK);
        remaining -= mu;
        let u: f64 = rng.gen();
        let mut p = (-mu).exp();
        let mut cdf = p;
        let mut k = 0u64;
        while u > cdf {
            k += 1;
            p *= mu / k as f64;
            let next = cdf + p;
            if next == cdf {
                break;
            }
            cdf = next;
        }
        total += k;
    }
    total
}

/// Per-increment generator: stream `k` of the ChaCha generator seeded by `seed`.
pub fn increment_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Simulates `n` independent increments `Z_k = γΔ + Σ_{i ≤ M_k} Y_i` with
/// `M_k ~ Poisson(λΔ)` and `Y_i ~ F`.
pub fn simulate(triple: &LevyTriple, delta: f64, n: usize, seed: u64) -> Result<IncrementSample> {
    if n == 0 {
        return Err(Error::Config("sample size must be at least 1".into()));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Config(format!("delta must be positive, got {delta}")));
    }
    let sampler = JumpSampler::new(triple);
    let mean = triple.lambda * delta;
    let drift = triple.gamma * delta;
    let values = (0..n as u64)
        .map(|k| {
            let mut rng = increment_rng(seed, k);
            let jumps = poisson_by_inversion(mean, &mut rng);
            let sum: f64 = (0..jumps).map(|_| sampler.draw(&mut rng)).sum();
            drift + sum
        })
        .collect();
    Ok(IncrementSample { delta, values, seed })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionClause {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub clauses: Vec<AssumptionClause>,
    /// `∫ log^β(max{|x|, e}) ν(dx)`.
    pub log_moment: f64,
}

impl AssumptionReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&AssumptionClause> {
        self.clauses.iter().filter(|c| !c.passed).collect()
    }
}

/// Checks the model assumptions clause by clause. `alpha` is the declared
/// regularity exponent of the absolutely continuous part and `beta` the
/// declared logarithmic moment order; pass `f64::INFINITY` to skip those
/// exponent bounds.
pub fn validate_assumptions(triple: &LevyTriple, alpha: f64, beta: f64) -> AssumptionReport {
    let mut clauses = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        clauses.push(AssumptionClause { name: name.to_string(), passed, detail });
    };

    push(
        "positive intensity",
        triple.lambda.is_finite() && triple.lambda > 0.0,
        format!("lambda = {}", triple.lambda),
    );
    push(
        "lattice pitch",
        triple.atom_spacing.is_finite() && triple.atom_spacing > 0.0,
        format!("atom_spacing = {}", triple.atom_spacing),
    );
    let total = triple.discrete_mass() + triple.ac_mass();
    push(
        "mass condition",
        (total - triple.lambda).abs() <= MASS_TOL * triple.lambda.abs().max(1.0),
        format!("sum q_j + int nu_ac = {total}, lambda = {}", triple.lambda),
    );
    let origin = triple.discrete_weights.get(&0).copied().unwrap_or(0.0);
    push("origin atom", origin == 0.0, format!("q_0 = {origin}"));
    let bad_weight = triple
        .discrete_weights
        .iter()
        .find(|(_, &q)| !(q >= 0.0 && q <= triple.lambda * (1.0 + MASS_TOL)));
    push(
        "weights in [0, lambda]",
        bad_weight.is_none(),
        bad_weight.map_or("all weights admissible".into(), |(j, q)| format!("q_{j} = {q}")),
    );
    let negative_density = triple
        .ac_density
        .as_ref()
        .is_some_and(|d| d.values.iter().any(|&v| v < 0.0));
    push(
        "nonnegative density",
        !negative_density,
        if negative_density { "density has negative cells".into() } else { "ok".into() },
    );
    // A bounded gridded density satisfies the modulus condition for every exponent.
    push(
        "regularity exponent",
        alpha > 4.0,
        format!("alpha = {alpha} (must exceed 4)"),
    );

    let lm_beta = if beta.is_finite() { beta } else { 2.0 };
    let log_weight = |x: f64| x.abs().max(std::f64::consts::E).ln().powf(lm_beta);
    let mut log_moment: f64 = triple
        .discrete_weights
        .iter()
        .map(|(&j, &q)| q * log_weight(triple.atom_spacing * j as f64))
        .sum();
    if let Some(d) = &triple.ac_density {
        log_moment += d
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| v.abs() * d.step * log_weight(d.cell_left(i) + 0.5 * d.step))
            .sum::<f64>();
    }
    push(
        "logarithmic moment",
        beta > 2.0 && log_moment.is_finite(),
        format!("beta = {beta}, integral = {log_moment}"),
    );

    AssumptionReport { clauses, log_moment }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson_unit() -> LevyTriple {
        LevyTriple::discrete(0.0, 1.0, [(1, 1.0)]).unwrap()
    }

    #[test]
    fn char_fn_at_origin_is_one() {
        let t = poisson_unit();
        assert_eq!(char_fn(&t, 1.0, 0.0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn pure_poisson_char_fn_at_pi() {
        let t = poisson_unit();
        let v = char_fn(&t, 1.0, std::f64::consts::PI);
        assert!((v.re - (-2.0f64).exp()).abs() < 1e-15);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn char_fn_modulus_bounds() {
        let step = 1.0 / 64.0;
        let d = DensityGrid::from_origin(-1.0, step, vec![0.4 / 2.0; 128]).unwrap();
        let t = LevyTriple::new(0.7, 1.5, 1.0, [(1, 0.6), (-2, 0.5)].into_iter().collect(), Some(d))
            .unwrap();
        for k in 0..2000 {
            let u = -50.0 + 0.05 * k as f64;
            let m = char_fn(&t, 0.8, u).norm();
            assert!(m <= 1.0 + 1e-12 && m >= (-2.0 * 1.5 * 0.8f64).exp() - 1e-12, "u = {u}");
        }
    }

    #[test]
    fn levy_cdf_limits() {
        let t = LevyTriple::discrete(0.0, 1.0, [(-1, 0.5), (1, 0.5)]).unwrap();
        assert_eq!(true_n(&t, f64::NEG_INFINITY), 0.0);
        assert_eq!(true_n(&t, -1e9), 0.0);
        assert_eq!(true_n(&t, 0.0), 0.5);
        assert_eq!(true_n(&t, -1.0), 0.5);
        assert_eq!(true_n(&t, 1.0), 1.0);
        assert_eq!(true_f(&t, f64::INFINITY), 1.0);
    }

    #[test]
    fn tiny_intensity_gives_empty_sums() {
        let t = LevyTriple::discrete(5.0, 1.0, [(1, 1e-6)]).unwrap();
        let s = simulate(&t, 1.0, 100, 7).unwrap();
        assert!(s.values.iter().all(|&z| z == 5.0));
    }

    #[test]
    fn simulation_is_reproducible() {
        let t = LevyTriple::discrete(0.3, 1.0, [(-1, 0.4), (2, 0.8)]).unwrap();
        let a = simulate(&t, 0.5, 500, 11).unwrap();
        let b = simulate(&t, 0.5, 500, 11).unwrap();
        let c = simulate(&t, 0.5, 500, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn no_jump_fraction_matches_binomial_oracle() {
        // Positive support: Z = γΔ exactly iff there is no jump.
        let t = LevyTriple::discrete(0.0, 1.0, [(1, 0.3), (2, 0.4)]).unwrap();
        let delta = 1.0;
        let n = 100_000;
        let s = simulate(&t, delta, n, 3).unwrap();
        let zeros = s.values.iter().filter(|&&z| z == 0.0).count() as f64 / n as f64;
        let p0 = (-t.lambda * delta).exp();
        let se = (p0 * (1.0 - p0) / n as f64).sqrt();
        assert!((zeros - p0).abs() < 3.0 * se, "{zeros} vs {p0}");
    }

    #[test]
    fn sample_mean_matches_moment_identity() {
        let d = DensityGrid::from_origin(0.0, 1.0 / 64.0, vec![0.5; 128]).unwrap();
        let t = LevyTriple::new(0.5, 1.5, 1.0, [(-1, 0.5)].into_iter().collect(), Some(d)).unwrap();
        let delta = 0.7;
        let n = 100_000;
        let s = simulate(&t, delta, n, 5).unwrap();
        let mean = s.values.iter().sum::<f64>() / n as f64;
        let expected = delta * (t.gamma + t.first_moment());
        // Var Z = Δ ∫x² ν(dx) for a compound Poisson increment.
        let se = (delta * t.second_moment() / n as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * se, "{mean} vs {expected}");
    }

    #[test]
    fn ac_jumps_follow_the_density() {
        // Piecewise-constant density on [0, 2] with unequal cells.
        let step = 1.0 / 64.0;
        let values: Vec<f64> = (0..128).map(|i| if i < 64 { 0.25 } else { 0.75 }).collect();
        let d = DensityGrid::from_origin(0.0, step, values).unwrap();
        let t = LevyTriple::new(0.0, 1.0, 1.0, BTreeMap::new(), Some(d)).unwrap();
        let sampler = JumpSampler::new(&t);
        let m = 100_000;
        let mut rng = increment_rng(9, 0);
        let mut draws: Vec<f64> = (0..m).map(|_| sampler.draw(&mut rng)).collect();
        draws.sort_by(f64::total_cmp);
        let ks = draws
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = t.jump_cdf(x);
                ((i + 1) as f64 / m as f64 - f).abs().max((f - i as f64 / m as f64).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 1.5 / (m as f64).sqrt(), "ks = {ks}");
    }

    #[test]
    fn assumption_report_flags_violations() {
        let mut w = BTreeMap::new();
        w.insert(0, 0.5);
        w.insert(1, 0.5);
        let t = LevyTriple { gamma: 0.0, lambda: 1.0, atom_spacing: 1.0, discrete_weights: w, ac_density: None };
        let r = validate_assumptions(&t, 5.0, 3.0);
        assert!(!r.passed());
        assert_eq!(r.failures()[0].name, "origin atom");

        let t = LevyTriple {
            gamma: 0.0,
            lambda: 2.0,
            atom_spacing: 1.0,
            discrete_weights: [(1, 0.5)].into_iter().collect(),
            ac_density: None,
        };
        let r = validate_assumptions(&t, 5.0, 3.0);
        assert!(r.failures().iter().any(|c| c.name == "mass condition"));
        assert!(LevyTriple::new(0.0, 2.0, 1.0, [(1, 0.5)].into_iter().collect(), None).is_err());

        let compact = LevyTriple::discrete(0.0, 1.0, [(3, 1.0)]).unwrap();
        for beta in [2.5, 10.0, 100.0] {
            let r = validate_assumptions(&compact, 5.0, beta);
            assert!(r.passed());
            assert!(r.log_moment.is_finite());
        }
    }

    #[test]
    fn model_spec_round_trip() {
        let json = r#"{"gamma":0.5,"lambda":1.0,"delta":2.0,"atom_spacing":1.0,
            "atoms":[{"j":-1,"q":0.4},{"j":1,"q":0.6}]}"#;
        let spec: ModelSpec = serde_json::from_str(json).unwrap();
        let t = spec.to_triple().unwrap();
        assert_eq!(t.p_j(1), 0.6);
        assert_eq!(ModelSpec::from_triple(&t, 2.0), spec);
    }
}
