//! Weight functions of the estimators and their Fourier transforms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::Hyperparameters;
use super::kernel::KernelSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    Lambda,
    Gamma,
    Qj { j: i64 },
    Q,
    N { t: f64 },
}

/// Building block of a weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Piece {
    /// `coef · 1_{[a, b]}`.
    Interval { a: f64, b: f64, coef: f64 },
    /// `coef · x · 1_{|x| < half_width}`.
    Odd { half_width: f64, coef: f64 },
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

impl Piece {
    /// `∫ f(x) e^{−iux} dx`.
    pub fn ft_neg(&self, u: f64) -> Complex64 {
        match *self {
            Piece::Interval { a, b, coef } => {
                let half = 0.5 * (b - a);
                coef * (b - a) * sinc(u * half) * Complex64::cis(-u * 0.5 * (a + b))
            }
            Piece::Odd { half_width: h, coef } => {
                let y = u * h;
                let real = if y.abs() < 1e-3 {
                    let y2 = y * y;
                    h * h * h * u * (-1.0 / 3.0 + y2 / 30.0 - y2 * y2 / 840.0)
                } else {
                    (y * y.cos() - y.sin()) / (u * u)
                };
                Complex64::new(0.0, 2.0 * coef * real)
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Piece::Interval { a, b, coef } => {
                if a <= x && x <= b {
                    coef
                } else {
                    0.0
                }
            }
            Piece::Odd { half_width, coef } => {
                if x.abs() < half_width {
                    coef * x
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTransform {
    pub pieces: Vec<Piece>,
}

impl WeightTransform {
    /// `𝓕f(−u)`.
    pub fn ft_neg(&self, u: f64) -> Complex64 {
        self.pieces.iter().map(|p| p.ft_neg(u)).sum()
    }

    /// `𝓕f(u)`.
    pub fn ft(&self, u: f64) -> Complex64 {
        self.ft_neg(-u)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.pieces.iter().map(|p| p.value(x)).sum()
    }
}

fn interval(a: f64, b: f64) -> Option<Piece> {
    (b > a).then_some(Piece::Interval { a, b, coef: 1.0 })
}

/// Truncation point of the distribution-function weight at `t`: frozen at the
/// nearer edge of the window around a lattice point.
pub fn frozen_point(t: f64, hp: &Hyperparameters) -> f64 {
    let eps = hp.atom_spacing;
    let j = (t / eps).round();
    let centre = eps * j;
    if (t - centre).abs() <= hp.window {
        if t < centre {
            centre - hp.window
        } else {
            centre + hp.window
        }
    } else {
        t
    }
}

/// `1_{[−H, t'] ∖ (−ε_n, ε_n)}` as at most two intervals.
pub fn n_weight_intervals(t: f64, hp: &Hyperparameters) -> Vec<(f64, f64)> {
    if t == f64::INFINITY || t >= hp.truncation {
        return lambda_intervals(hp);
    }
    if t == f64::NEG_INFINITY {
        return Vec::new();
    }
    let tp = frozen_point(t, hp);
    let mut out = Vec::with_capacity(2);
    let left_end = tp.min(-hp.window);
    if left_end > -hp.truncation {
        out.push((-hp.truncation, left_end));
    }
    let right_end = tp.min(hp.truncation);
    if right_end > hp.window {
        out.push((hp.window, right_end));
    }
    out
}

pub fn lambda_intervals(hp: &Hyperparameters) -> Vec<(f64, f64)> {
    vec![(-hp.truncation, -hp.window), (hp.window, hp.truncation)]
}

pub fn qj_interval(j: i64, hp: &Hyperparameters) -> (f64, f64) {
    let centre = hp.atom_spacing * j as f64;
    (centre - hp.window, centre + hp.window)
}

/// Indices `0 < |j| ≤ H̃_n/ε` entering the total discrete mass.
pub fn q_indices(hp: &Hyperparameters) -> Vec<i64> {
    let limit = hp.q_index_limit();
    (-limit..=limit).filter(|&j| j != 0).collect()
}

pub fn weight_transform(kind: WeightKind, hp: &Hyperparameters, kernel: &KernelSpec) -> Result<WeightTransform> {
    let from_intervals = |iv: Vec<(f64, f64)>| WeightTransform {
        pieces: iv.into_iter().filter_map(|(a, b)| interval(a, b)).collect(),
    };
    Ok(match kind {
        WeightKind::Lambda => from_intervals(lambda_intervals(hp)),
        WeightKind::Gamma => {
            let c = kernel.c();
            if c.abs() < 1e-6 {
                return Err(Error::KernelDegenerate(c));
            }
            WeightTransform { pieces: vec![Piece::Odd { half_width: hp.bandwidth, coef: 1.0 / c }] }
        }
        WeightKind::Qj { j } => {
            let limit = hp.q_index_limit();
            if j == 0 || j.abs() > limit {
                return Err(Error::IndexOutOfWindow { index: j, limit });
            }
            from_intervals(vec![qj_interval(j, hp)])
        }
        WeightKind::Q => from_intervals(q_indices(hp).into_iter().map(|j| qj_interval(j, hp)).collect()),
        WeightKind::N { t } => from_intervals(n_weight_intervals(t, hp)),
    })
}
