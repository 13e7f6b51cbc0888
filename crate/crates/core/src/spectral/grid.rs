use serde::{Deserialize, Serialize};

use super::config::Hyperparameters;
use crate::error::{Error, Result};

/// Symmetric uniform frequency grid `u_k = k·δu`, `k = −m..=m`, covering `[−1/h, 1/h]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub half_count: usize,
    pub step: f64,
}

impl FrequencyGrid {
    /// Finest grid needed so that `δu ≤ max_step` while hitting `±cutoff` exactly.
    pub fn new(cutoff: f64, max_step: f64) -> Result<Self> {
        if !(cutoff.is_finite() && cutoff > 0.0 && max_step.is_finite() && max_step > 0.0) {
            return Err(Error::Config(format!("invalid grid: cutoff {cutoff}, step {max_step}")));
        }
        let half_count = (cutoff / max_step).ceil().max(1.0) as usize;
        Ok(Self { half_count, step: cutoff / half_count as f64 })
    }

    /// Grid over `[−1/h_n, 1/h_n]` resolving `e^{iu(H_n + ε_n)}` with
    /// `oversampling` points per period.
    pub fn for_hyperparameters(hp: &Hyperparameters, oversampling: f64) -> Result<Self> {
        let fastest = hp.truncation + hp.window;
        Self::new(1.0 / hp.bandwidth, 2.0 * std::f64::consts::PI / (oversampling * fastest))
    }

    /// Same range, step halved.
    pub fn refined(&self) -> Self {
        Self { half_count: 2 * self.half_count, step: 0.5 * self.step }
    }

    pub fn len(&self) -> usize {
        2 * self.half_count + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of `u = 0`.
    pub fn center(&self) -> usize {
        self.half_count
    }

    pub fn cutoff(&self) -> f64 {
        self.half_count as f64 * self.step
    }

    pub fn point(&self, i: usize) -> f64 {
        (i as f64 - self.half_count as f64) * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Composite Simpson weight of grid index `i`.
    pub fn simpson_weight(&self, i: usize) -> f64 {
        let last = self.len() - 1;
        let base = self.step / 3.0;
        if i == 0 || i == last {
            base
        } else if i % 2 == 1 {
            4.0 * base
        } else {
            2.0 * base
        }
    }
}
