use nalgebra::{Cholesky, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::distributions::Distribution;
use serde::{Deserialize, Serialize};
use statrs::distribution::Normal;

use super::stats::{two_sided_p, two_sided_z};
use crate::asymptotics::CovarianceReport;
use crate::error::{Error, Result};
use crate::estimators::EstimateSet;

pub const SUP_DRAWS: usize = 10_000;
pub const CHOLESKY_JITTER: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bands {
    pub level: f64,
    pub n: usize,
    pub ts: Vec<f64>,
    pub f_hat: Vec<f64>,
    pub pointwise_radius: Vec<f64>,
    pub sup_radius: f64,
}

impl Bands {
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["t", "f_hat", "lower", "upper", "sup_lower", "sup_upper"])?;
        for i in 0..self.ts.len() {
            let (f, r) = (self.f_hat[i], self.pointwise_radius[i]);
            w.write_record([self.ts[i], f, f - r, f + r, f - self.sup_radius, f + self.sup_radius].map(|v| v.to_string()))?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }
}

/// Level-`level` quantile of `max_i |G_i|` for `G ~ N(0, Σ)`.
pub fn sup_quantile(sigma: &[Vec<f64>], level: f64, draws: usize, seed: u64) -> Result<f64> {
    let k = sigma.len();
    if k == 0 || sigma.iter().flatten().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    let mat = DMatrix::from_fn(k, k, |i, j| 0.5 * (sigma[i][j] + sigma[j][i]) + if i == j { CHOLESKY_JITTER } else { 0.0 });
    let chol = Cholesky::new(mat).ok_or(Error::NotPsd)?;
    let l = chol.l();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut maxima: Vec<f64> = (0..draws)
        .map(|_| {
            let z = DVector::from_iterator(k, (0..k).map(|_| normal.sample(&mut rng)));
            (&l * z).amax()
        })
        .collect();
    maxima.sort_by(f64::total_cmp);
    let idx = ((level * draws as f64).ceil() as usize).clamp(1, draws) - 1;
    Ok(maxima[idx])
}

/// Pointwise and uniform bands for `F` on the grid of the covariance report.
pub fn build_bands(estimates: &EstimateSet, covariance: &CovarianceReport, level: f64, seed: u64) -> Result<Bands> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!("level must lie in (0, 1), got {level}")));
    }
    let n = estimates.n as f64;
    let mut f_hat = Vec::with_capacity(covariance.ts.len());
    for &t in &covariance.ts {
        let v = estimates
            .f_hat
            .points
            .iter()
            .find(|(s, _)| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
            .map(|p| p.1)
            .ok_or_else(|| Error::Config(format!("estimates do not contain F_hat at t = {t}")))?;
        f_hat.push(v);
    }
    let z = two_sided_z(level);
    let sigma = &covariance.exact.sigma_f;
    let pointwise_radius: Vec<f64> = (0..sigma.len()).map(|i| z * (sigma[i][i].max(0.0) / n).sqrt()).collect();
    let widest = pointwise_radius.iter().copied().fold(0.0, f64::max);
    let sup = sup_quantile(sigma, level, SUP_DRAWS, seed)? / n.sqrt();
    Ok(Bands { level, n: estimates.n, ts: covariance.ts.clone(), f_hat, pointwise_radius, sup_radius: sup.max(widest) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentTest {
    pub hypothesis: String,
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentDecisions {
    pub level: f64,
    /// `H₀: q = 0`, no discrete part.
    pub no_discrete: ComponentTest,
    /// `H₀: p = 1`, no absolutely continuous part.
    pub no_continuous: ComponentTest,
}

/// Two-sided z-test of `H₀: θ = θ₀` with the standard error `√(σ²/n)`.
pub fn z_test(hypothesis: &str, estimate: f64, null: f64, variance: f64, n: usize, level: f64) -> Result<ComponentTest> {
    if variance < 1e-14 {
        return Err(Error::DivisionByNearZero { what: "null variance", value: variance });
    }
    let statistic = (n as f64).sqrt() * (estimate - null) / variance.sqrt();
    let p_value = two_sided_p(statistic);
    Ok(ComponentTest { hypothesis: hypothesis.into(), statistic, p_value, reject: p_value < 1.0 - level })
}

/// Tests for the presence of each component of the Lévy measure.
pub fn component_tests(estimates: &EstimateSet, covariance: &CovarianceReport, level: f64) -> Result<ComponentDecisions> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!("level must lie in (0, 1), got {level}")));
    }
    Ok(ComponentDecisions {
        level,
        no_discrete: z_test("q = 0", estimates.q_total_hat, 0.0, covariance.exact.sigma2_q, estimates.n, level)?,
        no_continuous: z_test("p = 1", estimates.p_total_hat, 1.0, covariance.exact.sigma2_p, estimates.n, level)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_covariance_gives_zero_sup() {
        assert_eq!(sup_quantile(&vec![vec![0.0; 3]; 3], 0.95, 100, 1).unwrap(), 0.0);
    }

    #[test]
    fn independent_coordinates() {
        // max of 2 iid |N(0,1)| has 95% quantile z with (2Φ(z)−1)² = 0.95
        let sigma = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let q = sup_quantile(&sigma, 0.95, 20_000, 3).unwrap();
        let exact = two_sided_z(0.95f64.sqrt());
        assert!((q - exact).abs() < 0.05, "{q} vs {exact}");
        let one = sup_quantile(&[vec![4.0]], 0.95, 20_000, 3).unwrap();
        assert!((one - 2.0 * 1.96).abs() < 0.1);
    }

    #[test]
    fn reproducible_draws() {
        let sigma = vec![vec![1.0, 0.5], vec![0.5, 1.0]];
        assert_eq!(sup_quantile(&sigma, 0.9, 500, 9).unwrap(), sup_quantile(&sigma, 0.9, 500, 9).unwrap());
    }

    #[test]
    fn non_psd_rejected() {
        let sigma = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        assert!(matches!(sup_quantile(&sigma, 0.95, 10, 1), Err(Error::NotPsd)));
    }

    #[test]
    fn z_tests() {
        let t = z_test("q = 0", 0.0, 0.0, 2.0, 100, 0.95).unwrap();
        assert_eq!(t.p_value, 1.0);
        assert!(!t.reject);
        let t = z_test("q = 0", 0.5, 0.0, 1.0, 100, 0.95).unwrap();
        assert!(t.reject && t.statistic == 5.0);
        assert!(matches!(z_test("q = 0", 0.1, 0.0, 0.0, 100, 0.95), Err(Error::DivisionByNearZero { .. })));
    }
}
