//! Limiting covariances of the estimators, computed from the law `P` of an
//! increment and the signed measure `Φ` inverting it in convolution.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{CdfIndex, SignedMeasure, LATTICE_TOL};
use crate::model::LevyTriple;

/// Default truncation tolerance of the convolution series.
pub const DEFAULT_SERIES_TOL: f64 = 1e-12;

/// `P` and `Φ` in the drift-free frame; both are translated by
/// `drift_shift = γΔ` in the original frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitLawPair {
    pub p: SignedMeasure,
    pub phi: SignedMeasure,
    pub drift_shift: f64,
    pub tol: f64,
}

pub fn limit_laws(triple: &LevyTriple, delta: f64, tol: f64) -> Result<LimitLawPair> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("series tolerance must be positive, got {tol}")));
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Config(format!("delta must be positive, got {delta}")));
    }
    let nu = triple.levy_measure()?;
    let ld = triple.lambda * delta;
    let p = nu.conv_exp(delta, tol * (-ld).exp()).scaled((-ld).exp());
    let phi = nu.reflect().conv_exp(-delta, tol * (-ld).exp()).scaled(ld.exp());
    Ok(LimitLawPair { p, phi, drift_shift: triple.gamma * delta, tol })
}

impl LimitLawPair {
    /// Same measures with the translation dropped.
    pub fn drift_free(&self) -> Self {
        Self { drift_shift: 0.0, ..self.clone() }
    }

    /// Atom locations and masses of `P` in the original frame.
    pub fn p_atoms(&self) -> Vec<(f64, f64)> {
        let eps = self.p.atom_spacing();
        self.p.atoms().iter().map(|(&j, &a)| (self.drift_shift + eps * j as f64, a)).collect()
    }

    /// Atom locations and masses of `Φ` in the original frame.
    pub fn phi_atoms(&self) -> Vec<(f64, f64)> {
        let eps = self.phi.atom_spacing();
        self.phi.atoms().iter().map(|(&j, &a)| (self.drift_shift + eps * j as f64, a)).collect()
    }
}

/// Indicator building blocks with exact convolution rules against `Φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Primitive {
    /// `1_{ℝ∖{0}}`.
    NonZero,
    /// `1_{{εj}}`, `j ≠ 0`.
    Point(i64),
    /// `1_{εℤ∖{0}}`.
    LatticeNonZero,
    /// `1_{(−∞, t]∖{0}}`.
    HalfLine(f64),
}

/// Limiting weights of the estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "weight", rename_all = "snake_case")]
pub enum LimitWeight {
    Lambda,
    Qj { j: i64 },
    Pj { j: i64 },
    Q,
    P,
    N { t: f64 },
    F { t: f64 },
}

impl LimitWeight {
    /// Expansion into primitives; `F` and the `p` weights need the true model.
    pub fn primitives(&self, triple: &LevyTriple) -> Result<Vec<(f64, Primitive)>> {
        let lambda = triple.lambda;
        Ok(match *self {
            LimitWeight::Lambda => vec![(1.0, Primitive::NonZero)],
            LimitWeight::Qj { j } => {
                if j == 0 {
                    return Err(Error::UnsupportedWeight("q_0".into()));
                }
                vec![(1.0, Primitive::Point(j))]
            }
            LimitWeight::Pj { j } => {
                if j == 0 {
                    return Err(Error::UnsupportedWeight("p_0".into()));
                }
                vec![(1.0 / lambda, Primitive::Point(j)), (-triple.p_j(j) / lambda, Primitive::NonZero)]
            }
            LimitWeight::Q => vec![(1.0, Primitive::LatticeNonZero)],
            LimitWeight::P => vec![(1.0 / lambda, Primitive::LatticeNonZero), (-triple.p_total() / lambda, Primitive::NonZero)],
            LimitWeight::N { t } => {
                if t.is_nan() {
                    return Err(Error::UnsupportedWeight("N(NaN)".into()));
                }
                vec![(1.0, Primitive::HalfLine(t))]
            }
            LimitWeight::F { t } => {
                if t.is_nan() {
                    return Err(Error::UnsupportedWeight("F(NaN)".into()));
                }
                vec![(1.0 / lambda, Primitive::HalfLine(t)), (-triple.jump_cdf(t) / lambda, Primitive::NonZero)]
            }
        })
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    x: f64,
    weight: f64,
    lattice: Option<i64>,
}

/// Quadrature nodes integrating piecewise-quadratic functions exactly against
/// `m`: its atoms, plus two Gauss points on every density cell piece between
/// the breakpoints `b + kδx`.
fn nodes(m: &SignedMeasure, breakpoints: &[f64]) -> Vec<Node> {
    let eps = m.atom_spacing();
    let mut out: Vec<Node> = m
        .atoms()
        .iter()
        .map(|(&j, &a)| Node { x: eps * j as f64, weight: a, lattice: Some(j) })
        .collect();
    let Some(d) = m.density() else { return out };
    let g = 0.5 / 3f64.sqrt();
    for (i, &v) in d.values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let a = d.cell_left(i);
        let b = a + d.step;
        let mut cuts = vec![a, b];
        for &t in breakpoints {
            if t.is_finite() {
                let c = a + (t - a).rem_euclid(d.step);
                if c > a + 1e-12 * d.step && c < b - 1e-12 * d.step {
                    cuts.push(c);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (mid, len) = (0.5 * (lo + hi), hi - lo);
            for s in [-g, g] {
                out.push(Node { x: mid + s * len, weight: 0.5 * v * len, lattice: None });
            }
        }
    }
    out
}

struct PhiView<'a> {
    phi: &'a SignedMeasure,
    cdf: CdfIndex,
    total: f64,
    atomic: f64,
}

impl<'a> PhiView<'a> {
    fn new(phi: &'a SignedMeasure) -> Self {
        Self { phi, cdf: CdfIndex::new(phi), total: phi.mass(), atomic: phi.atomic_mass() }
    }

    fn atom(&self, node: &Node) -> f64 {
        node.lattice.map_or(0.0, |j| self.phi.atom(j))
    }

    /// `(f ∗ Φ)(x) = ∫ f(x − y) Φ(dy)`.
    fn convolved(&self, prim: Primitive, node: &Node) -> f64 {
        match prim {
            Primitive::NonZero => self.total - self.atom(node),
            Primitive::Point(j) => node.lattice.map_or(0.0, |i| self.phi.atom(i - j)),
            Primitive::LatticeNonZero => node.lattice.map_or(0.0, |i| self.atomic - self.phi.atom(i)),
            Primitive::HalfLine(t) => {
                if t == f64::INFINITY {
                    self.total - self.atom(node)
                } else if t == f64::NEG_INFINITY {
                    0.0
                } else {
                    let own = if t >= 0.0 { self.atom(node) } else { 0.0 };
                    self.total - self.cdf.before(node.x - t) - own
                }
            }
        }
    }
}

/// `f(x)` for a primitive at a node of a measure without atom at 0.
fn pointwise(prim: Primitive, node: &Node, atom_spacing: f64) -> f64 {
    let at_origin = node.lattice == Some(0);
    let value = match prim {
        Primitive::NonZero => true,
        Primitive::Point(j) => node.lattice == Some(j),
        Primitive::LatticeNonZero => node.lattice.is_some(),
        Primitive::HalfLine(t) => node.x <= t + LATTICE_TOL * atom_spacing,
    };
    if value && !at_origin {
        1.0
    } else {
        0.0
    }
}

fn breakpoints(expansions: &[Vec<(f64, Primitive)>]) -> Vec<f64> {
    let mut out: Vec<f64> = expansions
        .iter()
        .flatten()
        .filter_map(|(_, p)| match p {
            Primitive::HalfLine(t) if t.is_finite() => Some(*t),
            _ => None,
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Gram matrix `Δ⁻² Σ_x w(x) g_a(x) g_b(x)` for the values `g` at `nodes`.
fn gram(values: &[Vec<f64>], node_weights: &[f64], delta: f64) -> Vec<Vec<f64>> {
    let k = values.len();
    let mut out = vec![vec![0.0; k]; k];
    let scale = 1.0 / (delta * delta);
    for a in 0..k {
        for b in a..k {
            let s: f64 = node_weights.iter().enumerate().map(|(i, w)| w * values[a][i] * values[b][i]).sum();
            out[a][b] = s * scale;
            out[b][a] = s * scale;
        }
    }
    out
}

/// `Δ⁻² ∫ (f_a ∗ Φ)(f_b ∗ Φ) dP` for every pair of weights.
pub fn covariance_matrix(weights: &[LimitWeight], triple: &LevyTriple, laws: &LimitLawPair, delta: f64) -> Result<Vec<Vec<f64>>> {
    let expansions = weights.iter().map(|w| w.primitives(triple)).collect::<Result<Vec<_>>>()?;
    let nodes = nodes(&laws.p, &breakpoints(&expansions));
    let view = PhiView::new(&laws.phi);
    let values: Vec<Vec<f64>> = expansions
        .iter()
        .map(|e| nodes.iter().map(|n| e.iter().map(|&(c, p)| c * view.convolved(p, n)).sum()).collect())
        .collect();
    let w: Vec<f64> = nodes.iter().map(|n| n.weight).collect();
    Ok(gram(&values, &w, delta))
}

pub fn covariance_functional(f1: LimitWeight, f2: LimitWeight, triple: &LevyTriple, laws: &LimitLawPair, delta: f64) -> Result<f64> {
    Ok(covariance_matrix(&[f1, f2], triple, laws, delta)?[0][1])
}

/// The two summands of `σ²_λ`: `(P({0})Φ({0})² − 1)/Δ²` and
/// `Δ⁻² Σ_{j≠0} P({εj}) Φ({εj})²`.
pub fn sigma_lambda_decomposition(laws: &LimitLawPair, delta: f64) -> Result<(f64, f64)> {
    if laws.drift_shift != 0.0 {
        return Err(Error::NonzeroDrift(laws.drift_shift));
    }
    let d2 = delta * delta;
    let origin = (laws.p.atom(0) * laws.phi.atom(0).powi(2) - 1.0) / d2;
    let series: f64 = laws
        .p
        .atoms()
        .iter()
        .filter(|(&j, _)| j != 0)
        .map(|(&j, &a)| a * laws.phi.atom(j).powi(2))
        .sum::<f64>()
        / d2;
    Ok((origin, series))
}

/// First-order small-`λΔ` approximation of the covariance matrix. Every
/// catalog weight vanishes at the origin, so this is `Δ⁻¹ ∫ f_a f_b dν`.
pub fn small_lambda_delta_matrix(weights: &[LimitWeight], triple: &LevyTriple, delta: f64) -> Result<Vec<Vec<f64>>> {
    let expansions = weights.iter().map(|w| w.primitives(triple)).collect::<Result<Vec<_>>>()?;
    let nu = triple.levy_measure()?;
    let nodes = nodes(&nu, &breakpoints(&expansions));
    let eps = triple.atom_spacing;
    let values: Vec<Vec<f64>> = expansions
        .iter()
        .map(|e| nodes.iter().map(|n| e.iter().map(|&(c, p)| c * pointwise(p, n, eps)).sum()).collect())
        .collect();
    let w: Vec<f64> = nodes.iter().map(|n| n.weight).collect();
    let mut m = gram(&values, &w, 1.0);
    for row in &mut m {
        for v in row.iter_mut() {
            *v /= delta;
        }
    }
    Ok(m)
}

pub fn small_lambda_delta(f1: LimitWeight, f2: LimitWeight, triple: &LevyTriple, delta: f64) -> Result<f64> {
    Ok(small_lambda_delta_matrix(&[f1, f2], triple, delta)?[0][1])
}

/// Smallest eigenvalue of a symmetric matrix (`+∞` when empty).
pub fn min_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let k = m.len();
    if k == 0 {
        return f64::INFINITY;
    }
    let mat = DMatrix::from_fn(k, k, |i, j| m[i][j]);
    SymmetricEigen::new(mat).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Default evaluation grid: 41 points over `[−5ε, 5ε]`.
pub fn default_grid(atom_spacing: f64) -> Vec<f64> {
    (0..41).map(|i| atom_spacing * (-5.0 + 0.25 * i as f64)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceBlock {
    pub sigma2_lambda: f64,
    pub sigma2_qj: BTreeMap<i64, f64>,
    pub sigma2_pj: BTreeMap<i64, f64>,
    pub sigma2_q: f64,
    pub sigma2_p: f64,
    /// `Σᴺ_{s,t}` over `ts`.
    pub sigma_n: Vec<Vec<f64>>,
    /// `Σᶠ_{s,t}` over `ts`.
    pub sigma_f: Vec<Vec<f64>>,
    /// `Σᴺ_{t,t}` at `t = −∞` and `t = +∞`.
    pub sigma_n_tails: [f64; 2],
    /// `Σᶠ_{t,t}` at `t = −∞` and `t = +∞`.
    pub sigma_f_tails: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub delta: f64,
    pub lambda: f64,
    pub series_tol: f64,
    pub ts: Vec<f64>,
    pub exact: CovarianceBlock,
    pub small_lambda_delta: CovarianceBlock,
    pub sigma_n_min_eigenvalue: f64,
    pub sigma_f_min_eigenvalue: f64,
}

/// Lattice indices reported for the atom weights: `0 < |j| ≤` the largest
/// index carrying mass (at least 1).
fn reported_indices(triple: &LevyTriple) -> Vec<i64> {
    let reach = triple.discrete_weights.keys().map(|j| j.abs()).max().unwrap_or(1).max(1);
    (-reach..=reach).filter(|&j| j != 0).collect()
}

fn catalog(indices: &[i64], ts: &[f64]) -> Vec<LimitWeight> {
    let mut w = vec![LimitWeight::Lambda, LimitWeight::Q, LimitWeight::P];
    w.extend(indices.iter().map(|&j| LimitWeight::Qj { j }));
    w.extend(indices.iter().map(|&j| LimitWeight::Pj { j }));
    let grid: Vec<f64> = std::iter::once(f64::NEG_INFINITY).chain(ts.iter().copied()).chain(std::iter::once(f64::INFINITY)).collect();
    w.extend(grid.iter().map(|&t| LimitWeight::N { t }));
    w.extend(grid.iter().map(|&t| LimitWeight::F { t }));
    w
}

fn block(m: &[Vec<f64>], indices: &[i64], ts_len: usize) -> CovarianceBlock {
    let k = indices.len();
    let n0 = 3 + 2 * k;
    let g = ts_len + 2;
    let f0 = n0 + g;
    let sub = |start: usize| -> Vec<Vec<f64>> { (1..=ts_len).map(|a| (1..=ts_len).map(|b| m[start + a][start + b]).collect()).collect() };
    CovarianceBlock {
        sigma2_lambda: m[0][0],
        sigma2_q: m[1][1],
        sigma2_p: m[2][2],
        sigma2_qj: indices.iter().enumerate().map(|(i, &j)| (j, m[3 + i][3 + i])).collect(),
        sigma2_pj: indices.iter().enumerate().map(|(i, &j)| (j, m[3 + k + i][3 + k + i])).collect(),
        sigma_n: sub(n0),
        sigma_f: sub(f0),
        sigma_n_tails: [m[n0][n0], m[n0 + g - 1][n0 + g - 1]],
        sigma_f_tails: [m[f0][f0], m[f0 + g - 1][f0 + g - 1]],
    }
}

impl CovarianceReport {
    pub fn compute(triple: &LevyTriple, delta: f64, tol: f64, ts: &[f64]) -> Result<Self> {
        let laws = limit_laws(triple, delta, tol)?;
        let indices = reported_indices(triple);
        let weights = catalog(&indices, ts);
        let exact = covariance_matrix(&weights, triple, &laws, delta)?;
        let approx = small_lambda_delta_matrix(&weights, triple, delta)?;
        let exact = block(&exact, &indices, ts.len());
        let small = block(&approx, &indices, ts.len());
        Ok(Self {
            delta,
            lambda: triple.lambda,
            series_tol: tol,
            ts: ts.to_vec(),
            sigma_n_min_eigenvalue: min_eigenvalue(&exact.sigma_n),
            sigma_f_min_eigenvalue: min_eigenvalue(&exact.sigma_f),
            exact,
            small_lambda_delta: small,
        })
    }
}

/// Matrix over `ts × ts` as CSV with a header row of `t` values.
pub fn matrix_csv(ts: &[f64], m: &[Vec<f64>]) -> String {
    let mut out = String::from("s");
    for t in ts {
        out.push_str(&format!(",{t}"));
    }
    out.push('\n');
    for (s, row) in ts.iter().zip(m) {
        out.push_str(&format!("{s}"));
        for v in row {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}
