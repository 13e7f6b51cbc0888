//! Finite signed measures on the real line, stored as masses on the lattice
//! `ε·ℤ` plus a piecewise-constant density on a uniform cell grid.
//!
//! Density cell `i` covers `[(start + i)·δx, (start + i + 1)·δx)` and the cell
//! width must divide the lattice pitch, so shifting a density by an atom is an
//! exact index shift. Convolving two piecewise-constant densities produces a
//! piecewise-linear one; the result is stored as its exact cell averages,
//! which keeps mass, commutativity and associativity exact.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance (in units of the lattice pitch) used when deciding
/// whether a real location sits on the lattice.
pub const LATTICE_TOL: f64 = 1e-9;

/// Atoms lighter than this fraction of the total variation are dropped after
/// every convolution.
const PRUNE_REL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    /// Index of the first cell.
    pub start: i64,
    /// Cell width δx.
    pub step: f64,
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn new(start: i64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::Config(format!("density step must be positive, got {step}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("density values must be finite".into()));
        }
        Ok(Self { start, step, values })
    }

    /// Builds a grid whose first cell starts at `origin`, which must be a
    /// multiple of `step`.
    pub fn from_origin(origin: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::Config(format!("density step must be positive, got {step}")));
        }
        let ratio = origin / step;
        let start = ratio.round();
        if (ratio - start).abs() > 1e-6 {
            return Err(Error::Config(format!(
                "density origin {origin} is not a multiple of the step {step}"
            )));
        }
        Self::new(start as i64, step, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn origin(&self) -> f64 {
        self.start as f64 * self.step
    }

    /// Closed interval outside which the density vanishes.
    pub fn support(&self) -> (f64, f64) {
        let a = self.origin();
        (a, a + self.values.len() as f64 * self.step)
    }

    pub fn cell_left(&self, i: usize) -> f64 {
        (self.start + i as i64) as f64 * self.step
    }

    pub fn mass(&self) -> f64 {
        self.step * self.values.iter().sum::<f64>()
    }

    pub fn total_variation(&self) -> f64 {
        self.step * self.values.iter().map(|v| v.abs()).sum::<f64>()
    }

    /// Density value at `x` (value of the cell containing `x`, zero outside).
    pub fn value_at(&self, x: f64) -> f64 {
        let c = (x / self.step).floor() as i64 - self.start;
        if c < 0 || c >= self.values.len() as i64 {
            0.0
        } else {
            self.values[c as usize]
        }
    }

    /// `∫_{-∞}^t` of the density.
    pub fn integral_to(&self, t: f64) -> f64 {
        let (a, b) = self.support();
        if t <= a {
            return 0.0;
        }
        if t >= b {
            return self.mass();
        }
        let pos = t / self.step - self.start as f64;
        let c = (pos.floor() as usize).min(self.values.len() - 1);
        let full: f64 = self.values[..c].iter().sum::<f64>() * self.step;
        full + self.values[c] * (pos - c as f64) * self.step
    }

    fn trim(&mut self, threshold: f64) {
        let lead = self
            .values
            .iter()
            .take_while(|v| v.abs() * self.step <= threshold)
            .count();
        if lead == self.values.len() {
            self.values.clear();
            return;
        }
        let trail = self
            .values
            .iter()
            .rev()
            .take_while(|v| v.abs() * self.step <= threshold)
            .count();
        self.values.truncate(self.values.len() - trail);
        self.values.drain(..lead);
        self.start += lead as i64;
    }
}

/// Accumulates shifted, scaled copies of densities onto a common grid.
struct DensityAccumulator {
    start: i64,
    values: Vec<f64>,
}

impl DensityAccumulator {
    fn new(start: i64, end: i64) -> Self {
        Self { start, values: vec![0.0; (end - start).max(0) as usize] }
    }

    fn add(&mut self, offset: i64, values: &[f64], scale: f64) {
        let base = (offset - self.start) as usize;
        for (slot, v) in self.values[base..base + values.len()].iter_mut().zip(values) {
            *slot += scale * v;
        }
    }
}

/// A finite signed measure: lattice atoms plus a gridded density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedMeasure {
    atom_spacing: f64,
    atoms: BTreeMap<i64, f64>,
    density: Option<DensityGrid>,
}

impl SignedMeasure {
    pub fn zero(atom_spacing: f64) -> Self {
        Self { atom_spacing, atoms: BTreeMap::new(), density: None }
    }

    pub fn dirac(atom_spacing: f64, index: i64, mass: f64) -> Self {
        let mut m = Self::zero(atom_spacing);
        m.atoms.insert(index, mass);
        m
    }

    pub fn from_atoms<I>(atom_spacing: f64, atoms: I) -> Self
    where
        I: IntoIterator<Item = (i64, f64)>,
    {
        let mut m = Self::zero(atom_spacing);
        for (j, a) in atoms {
            *m.atoms.entry(j).or_insert(0.0) += a;
        }
        m
    }

    /// Attaches a density. The cell width must divide the lattice pitch.
    pub fn with_density(mut self, grid: DensityGrid) -> Result<Self> {
        cells_per_spacing(self.atom_spacing, grid.step)?;
        self.density = if grid.is_empty() { None } else { Some(grid) };
        Ok(self)
    }

    pub fn atom_spacing(&self) -> f64 {
        self.atom_spacing
    }

    pub fn atoms(&self) -> &BTreeMap<i64, f64> {
        &self.atoms
    }

    pub fn density(&self) -> Option<&DensityGrid> {
        self.density.as_ref()
    }

    /// Mass of the atom at lattice index `j` (zero when absent).
    pub fn atom(&self, j: i64) -> f64 {
        self.atoms.get(&j).copied().unwrap_or(0.0)
    }

    /// Mass of the atom at real location `x`, zero when `x` is off the lattice.
    pub fn atom_at(&self, x: f64) -> f64 {
        lattice_index(x, self.atom_spacing).map_or(0.0, |j| self.atom(j))
    }

    pub fn atomic_mass(&self) -> f64 {
        self.atoms.values().sum()
    }

    pub fn mass(&self) -> f64 {
        self.atomic_mass() + self.density.as_ref().map_or(0.0, DensityGrid::mass)
    }

    pub fn total_variation(&self) -> f64 {
        self.atoms.values().map(|a| a.abs()).sum::<f64>()
            + self.density.as_ref().map_or(0.0, DensityGrid::total_variation)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for a in out.atoms.values_mut() {
            *a *= factor;
        }
        if let Some(d) = out.density.as_mut() {
            for v in &mut d.values {
                *v *= factor;
            }
        }
        out
    }

    /// Sum of two measures on the same lattice and cell grid.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut atoms = self.atoms.clone();
        for (&j, &a) in &other.atoms {
            *atoms.entry(j).or_insert(0.0) += a;
        }
        let density = match (&self.density, &other.density) {
            (None, None) => None,
            (Some(d), None) | (None, Some(d)) => Some(d.clone()),
            (Some(a), Some(b)) => {
                let start = a.start.min(b.start);
                let end = (a.start + a.len() as i64).max(b.start + b.len() as i64);
                let mut acc = DensityAccumulator::new(start, end);
                acc.add(a.start, &a.values, 1.0);
                acc.add(b.start, &b.values, 1.0);
                Some(DensityGrid { start: acc.start, step: a.step, values: acc.values })
            }
        };
        Ok(Self { atom_spacing: self.atom_spacing, atoms, density })
    }

    /// Mirror image `A ↦ m(−A)`.
    pub fn reflect(&self) -> Self {
        let atoms = self.atoms.iter().map(|(&j, &a)| (-j, a)).collect();
        let density = self.density.as_ref().map(|d| DensityGrid {
            start: -(d.start + d.len() as i64),
            step: d.step,
            values: d.values.iter().rev().copied().collect(),
        });
        Self { atom_spacing: self.atom_spacing, atoms, density }
    }

    /// Convolution `self ∗ other`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.convolve_aligned(other))
    }

    fn convolve_aligned(&self, other: &Self) -> Self {
        let mut atoms: BTreeMap<i64, f64> = BTreeMap::new();
        for (&j, &a) in &self.atoms {
            for (&k, &b) in &other.atoms {
                *atoms.entry(j + k).or_insert(0.0) += a * b;
            }
        }

        let step = self.density.as_ref().or(other.density.as_ref()).map(|d| d.step);
        let density = step.and_then(|step| {
            let r = cells_per_spacing(self.atom_spacing, step).expect("checked grid");
            // (offset in cells, values, scale) contributions
            let mut pieces: Vec<(i64, Vec<f64>)> = Vec::new();
            let mut spread = |atoms: &BTreeMap<i64, f64>, d: &DensityGrid| {
                for (&j, &a) in atoms {
                    pieces.push((d.start + j * r, d.values.iter().map(|v| a * v).collect()));
                }
            };
            if let Some(d) = &other.density {
                spread(&self.atoms, d);
            }
            if let Some(d) = &self.density {
                spread(&other.atoms, d);
            }
            if let (Some(a), Some(b)) = (&self.density, &other.density) {
                pieces.push((a.start + b.start, cell_average_convolution(&a.values, &b.values, step)));
            }
            if pieces.is_empty() {
                return None;
            }
            let start = pieces.iter().map(|p| p.0).min().unwrap();
            let end = pieces.iter().map(|p| p.0 + p.1.len() as i64).max().unwrap();
            let mut acc = DensityAccumulator::new(start, end);
            for (offset, vals) in &pieces {
                acc.add(*offset, vals, 1.0);
            }
            Some(DensityGrid { start: acc.start, step, values: acc.values })
        });

        let mut out = Self { atom_spacing: self.atom_spacing, atoms, density };
        out.prune();
        out
    }

    /// Truncated convolution exponential `Σ_{k≤K} m^{∗k} s^k / k!`, with `K`
    /// the first index whose total-variation tail bound
    /// `Σ_{k>K} (‖m‖_TV |s|)^k / k!` falls below `tol`.
    pub fn conv_exp(&self, scale: f64, tol: f64) -> Self {
        let k_max = series_terms(self.total_variation() * scale.abs(), tol);
        let mut term = Self::dirac(self.atom_spacing, 0, 1.0);
        let mut sum = term.clone();
        for k in 1..=k_max {
            term = term.convolve_aligned(self).scaled(scale / k as f64);
            sum = sum.add(&term).expect("aligned by construction");
        }
        sum.prune();
        sum
    }

    /// Right-continuous cumulative function `t ↦ m((−∞, t])` evaluated on `ts`.
    pub fn cumulative(&self, ts: &[f64]) -> CumulativeTable {
        debug_assert!(ts.windows(2).all(|w| w[0] <= w[1]), "ts must be sorted");
        let index = CdfIndex::new(self);
        CumulativeTable {
            ts: ts.to_vec(),
            values: ts.iter().map(|&t| index.at(t)).collect(),
            atoms: self
                .atoms
                .iter()
                .map(|(&j, &a)| (j as f64 * self.atom_spacing, a))
                .collect(),
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        let (e1, e2) = (self.atom_spacing, other.atom_spacing);
        if (e1 - e2).abs() > 1e-12 * e1.max(e2) {
            return Err(Error::Config(format!("lattice pitch mismatch: {e1} vs {e2}")));
        }
        if let (Some(a), Some(b)) = (&self.density, &other.density) {
            if (a.step - b.step).abs() > 1e-12 * a.step.max(b.step) {
                return Err(Error::Config(format!(
                    "density grid step mismatch: {} vs {}",
                    a.step, b.step
                )));
            }
        }
        Ok(())
    }

    fn prune(&mut self) {
        let tv = self.total_variation();
        let threshold = PRUNE_REL * tv;
        self.atoms.retain(|_, a| a.abs() >= threshold && *a != 0.0);
        if let Some(d) = self.density.as_mut() {
            d.trim(threshold);
            if d.is_empty() {
                self.density = None;
            }
        }
    }
}

/// Number of cells per lattice pitch; errors unless it is a positive integer.
pub fn cells_per_spacing(atom_spacing: f64, step: f64) -> Result<i64> {
    let ratio = atom_spacing / step;
    let r = ratio.round();
    if r < 1.0 || (ratio - r).abs() > 1e-6 {
        return Err(Error::Config(format!(
            "density step {step} does not divide the lattice pitch {atom_spacing}"
        )));
    }
    Ok(r as i64)
}

/// Lattice index of `x` when `x` lies on `ε·ℤ`.
pub fn lattice_index(x: f64, atom_spacing: f64) -> Option<i64> {
    let r = x / atom_spacing;
    let j = r.round();
    ((r - j).abs() <= LATTICE_TOL && j.is_finite()).then_some(j as i64)
}

/// Smallest `K` such that the tail `Σ_{k>K} t^k/k!` is bounded by `tol`.
pub fn series_terms(t: f64, tol: f64) -> usize {
    let mut k = 0usize;
    let mut term = 1.0_f64; // t^k / k!
    loop {
        let next = term * t / (k + 1) as f64;
        let ratio = t / (k + 2) as f64;
        if ratio < 1.0 && next / (1.0 - ratio) < tol {
            return k;
        }
        k += 1;
        term = next;
    }
}

/// Cell averages of the convolution of two piecewise-constant densities
/// sharing the cell width `step`; output has `a.len() + b.len()` cells
/// starting at the sum of the input starts.
fn cell_average_convolution(a: &[f64], b: &[f64], step: f64) -> Vec<f64> {
    let mut c = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (slot, &y) in c[i..i + b.len()].iter_mut().zip(b) {
            *slot += x * y;
        }
    }
    let mut out = vec![0.0; c.len() + 1];
    for (m, slot) in out.iter_mut().enumerate() {
        let hi = if m < c.len() { c[m] } else { 0.0 };
        let lo = if m > 0 { c[m - 1] } else { 0.0 };
        *slot = 0.5 * (hi + lo) * step;
    }
    out
}

/// `m((−∞, t])` evaluated on a grid, with the atoms listed separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeTable {
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
    /// (location, mass) of every atom.
    pub atoms: Vec<(f64, f64)>,
}

/// Prefix sums supporting O(log n) cumulative queries on a measure.
#[derive(Debug, Clone)]
pub struct CdfIndex {
    atom_spacing: f64,
    indices: Vec<i64>,
    /// prefix[i] = sum of the first i atom masses.
    prefix: Vec<f64>,
    density: Option<(DensityGrid, Vec<f64>)>,
    total: f64,
}

impl CdfIndex {
    pub fn new(m: &SignedMeasure) -> Self {
        let indices: Vec<i64> = m.atoms.keys().copied().collect();
        let mut prefix = Vec::with_capacity(indices.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for a in m.atoms.values() {
            acc += a;
            prefix.push(acc);
        }
        let density = m.density.as_ref().map(|d| {
            let mut p = Vec::with_capacity(d.len() + 1);
            let mut s = 0.0;
            p.push(0.0);
            for v in &d.values {
                s += v * d.step;
                p.push(s);
            }
            (d.clone(), p)
        });
        Self { atom_spacing: m.atom_spacing, indices, prefix, density, total: m.mass() }
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// `m((−∞, t])`.
    pub fn at(&self, t: f64) -> f64 {
        if t == f64::INFINITY {
            return self.total;
        }
        if t == f64::NEG_INFINITY {
            return 0.0;
        }
        let cut = t / self.atom_spacing + LATTICE_TOL;
        let n = self.indices.partition_point(|&j| (j as f64) <= cut);
        self.prefix[n] + self.density_to(t)
    }

    /// `m((−∞, t))`.
    pub fn before(&self, t: f64) -> f64 {
        if t == f64::INFINITY {
            return self.total;
        }
        if t == f64::NEG_INFINITY {
            return 0.0;
        }
        let cut = t / self.atom_spacing - LATTICE_TOL;
        let n = self.indices.partition_point(|&j| (j as f64) < cut);
        self.prefix[n] + self.density_to(t)
    }

    fn density_to(&self, t: f64) -> f64 {
        let Some((d, p)) = &self.density else { return 0.0 };
        let pos = t / d.step - d.start as f64;
        if pos <= 0.0 {
            return 0.0;
        }
        let len = d.len();
        if pos >= len as f64 {
            return p[len];
        }
        let c = pos.floor() as usize;
        p[c] + d.values[c] * (pos - c as f64) * d.step
    }
}
