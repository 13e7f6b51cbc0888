use num_complex::Complex64;

use super::grid::FrequencyGrid;

const RESYNC: usize = 64;

/// Distinct values with their multiplicities, in ascending order.
fn grouped(values: &[f64]) -> Vec<(f64, usize)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize)> = Vec::new();
    for z in sorted {
        match out.last_mut() {
            Some((v, c)) if *v == z => *c += 1,
            _ => out.push((z, 1)),
        }
    }
    out
}

/// `φ_n(u_k) = n⁻¹ Σ e^{i u_k Z}` for `k = 0..=m` (non-negative half of the grid).
pub fn ecf_half(values: &[f64], grid: &FrequencyGrid) -> Vec<Complex64> {
    let m = grid.half_count;
    let mut acc = vec![Complex64::new(0.0, 0.0); m + 1];
    if values.is_empty() {
        return acc;
    }
    for (z, count) in grouped(values) {
        let w = count as f64;
        let step = Complex64::cis(grid.step * z);
        let mut rot = Complex64::new(1.0, 0.0);
        for (k, a) in acc.iter_mut().enumerate() {
            if k % RESYNC == 0 {
                rot = Complex64::cis(k as f64 * grid.step * z);
            }
            *a += w * rot;
            rot *= step;
        }
    }
    let n = values.len() as f64;
    for a in acc.iter_mut() {
        *a /= n;
    }
    acc[0] = Complex64::new(1.0, 0.0);
    acc
}

/// Full symmetric grid, the negative half filled by conjugation.
pub fn ecf(values: &[f64], grid: &FrequencyGrid) -> Vec<Complex64> {
    mirror(&ecf_half(values, grid))
}

/// Extends `g(u_k)`, `k ≥ 0`, to the full grid by `g(−u) = conj(g(u))`.
pub fn mirror(half: &[Complex64]) -> Vec<Complex64> {
    let m = half.len() - 1;
    let mut out = Vec::with_capacity(2 * m + 1);
    out.extend(half[1..].iter().rev().map(|v| v.conj()));
    out.extend_from_slice(half);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn direct(values: &[f64], u: f64) -> Complex64 {
        values.iter().map(|z| Complex64::cis(u * z)).sum::<Complex64>() / values.len() as f64
    }

    #[test]
    fn all_zero_sample_is_one() {
        let g = FrequencyGrid::new(50.0, 0.1).unwrap();
        for v in ecf(&[0.0; 17], &g) {
            assert!((v - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn two_point_average_vanishes() {
        let g = FrequencyGrid::new(1.0, 1.0).unwrap();
        let v = ecf(&[0.0, PI], &g);
        assert_eq!(v[g.center()], Complex64::new(1.0, 0.0));
        assert!(v[g.center() + 1].norm() < 1e-15);
    }

    #[test]
    fn matches_direct_summation_and_symmetry() {
        let values: Vec<f64> = (0..300).map(|i| ((i * 37 % 101) as f64 - 50.0) * 0.173).collect();
        let g = FrequencyGrid::new(40.0, 0.013).unwrap();
        let v = ecf(&values, &g);
        for i in (0..g.len()).step_by(97) {
            let d = direct(&values, g.point(i));
            assert!((v[i] - d).norm() < 1e-12, "{i}: {} vs {}", v[i], d);
        }
        for i in 0..g.len() {
            assert_eq!(v[i], v[g.len() - 1 - i].conj());
        }
    }
}
