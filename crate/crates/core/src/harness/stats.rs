use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (NaN below two values).
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// `P(K > x)` for the limiting Kolmogorov distribution.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov–Smirnov test against `N(0, 1)`.
pub fn ks_standard_normal(xs: &[f64]) -> Option<KsResult> {
    if xs.is_empty() {
        return None;
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = normal.cdf(x);
        d = d.max((i as f64 + 1.0) / m - f).max(f - i as f64 / m);
    }
    let sm = m.sqrt();
    Some(KsResult { statistic: d, p_value: kolmogorov_survival((sm + 0.12 + 0.11 / sm) * d) })
}

/// Two-sided standard normal quantile `z` with `P(|Z| ≤ z) = level`.
pub fn two_sided_z(level: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(0.5 + 0.5 * level)
}

/// Two-sided p-value of a standard normal statistic.
pub fn two_sided_p(z: f64) -> f64 {
    2.0 * Normal::new(0.0, 1.0).expect("standard normal").sf(z.abs())
}
