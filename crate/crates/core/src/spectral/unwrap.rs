use num_complex::Complex64;
use std::f64::consts::PI;

use super::grid::FrequencyGrid;
use crate::error::{Error, Result};

/// Largest tolerated `|v_{k+1}/v_k − 1|` between neighbours.
pub const MAX_RATIO_DEVIATION: f64 = 0.5;

/// Continuous logarithm of `values` on `grid`, zero at `u = 0`, obtained by
/// unwrapping the phase outward from the centre in both directions.
pub fn distinguished_log(values: &[Complex64], grid: &FrequencyGrid, kappa: f64) -> Result<Vec<Complex64>> {
    if values.len() != grid.len() {
        return Err(Error::Config(format!(
            "{} values for a grid of {} points",
            values.len(),
            grid.len()
        )));
    }
    let c = grid.center();
    let mut out = vec![Complex64::new(0.0, 0.0); values.len()];
    check_modulus(values[c], grid.point(c), kappa)?;
    out[c] = Complex64::new(values[c].norm().ln(), values[c].arg());
    walk(values, grid, kappa, &mut out, c + 1..values.len(), c)?;
    walk(values, grid, kappa, &mut out, (0..c).rev(), c)?;
    Ok(out)
}

fn check_modulus(v: Complex64, u: f64, kappa: f64) -> Result<()> {
    let modulus = v.norm();
    if !(modulus >= kappa) || modulus == 0.0 {
        return Err(Error::BranchAmbiguity { u, modulus, kappa });
    }
    Ok(())
}

fn walk<I: Iterator<Item = usize>>(
    values: &[Complex64],
    grid: &FrequencyGrid,
    kappa: f64,
    out: &mut [Complex64],
    order: I,
    start: usize,
) -> Result<()> {
    let mut prev = start;
    for k in order {
        let u = grid.point(k);
        check_modulus(values[k], u, kappa)?;
        let ratio = values[k] / values[prev];
        let deviation = (ratio - 1.0).norm();
        if deviation > MAX_RATIO_DEVIATION {
            return Err(Error::PhaseJump { u, deviation });
        }
        let guess = out[prev].im + ratio.arg();
        let principal = values[k].arg();
        let winds = ((guess - principal) / (2.0 * PI)).round();
        out[k] = Complex64::new(values[k].norm().ln(), principal + 2.0 * PI * winds);
        prev = k;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_values_give_zero() {
        let g = FrequencyGrid::new(10.0, 0.1).unwrap();
        let l = distinguished_log(&vec![Complex64::new(1.0, 0.0); g.len()], &g, 0.1).unwrap();
        assert!(l.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn pure_phase_unwraps_past_pi() {
        let g = FrequencyGrid::new(20.0, 0.01).unwrap();
        let vals: Vec<_> = g.points().map(|u| Complex64::cis(5.0 * u)).collect();
        let l = distinguished_log(&vals, &g, 0.5).unwrap();
        for (i, u) in g.points().enumerate() {
            assert!((l[i] - Complex64::new(0.0, 5.0 * u)).norm() < 1e-11 * (1.0 + u.abs()));
        }
        assert!(l[g.len() - 1].im > 99.0);
    }

    #[test]
    fn poisson_log_recovered() {
        let g = FrequencyGrid::new(30.0, 0.02).unwrap();
        let delta = 1.0;
        let exact = |u: f64| delta * (Complex64::cis(u) - 1.0);
        let vals: Vec<_> = g.points().map(|u| exact(u).exp()).collect();
        let l = distinguished_log(&vals, &g, 0.01).unwrap();
        for (i, u) in g.points().enumerate() {
            assert!((l[i] - exact(u)).norm() < 1e-12);
            assert!(l[i].re == l[g.len() - 1 - i].re);
            assert!(l[i].im == -l[g.len() - 1 - i].im);
        }
    }

    #[test]
    fn small_modulus_refused() {
        let g = FrequencyGrid::new(1.0, 0.5).unwrap();
        let mut vals = vec![Complex64::new(1.0, 0.0); g.len()];
        vals[0] = Complex64::new(1e-3, 0.0);
        assert!(matches!(distinguished_log(&vals, &g, 0.01), Err(Error::BranchAmbiguity { .. })));
    }

    #[test]
    fn abrupt_step_refused() {
        let g = FrequencyGrid::new(2.0, 0.5).unwrap();
        let mut vals = vec![Complex64::new(1.0, 0.0); g.len()];
        vals[g.len() - 1] = Complex64::new(-1.0, 0.0);
        assert!(matches!(distinguished_log(&vals, &g, 0.01), Err(Error::PhaseJump { .. })));
    }

    proptest! {
        #[test]
        fn round_trip_with_winding(
            a in -5.0f64..5.0, b in -0.5f64..0.5, c in -2.0f64..2.0, r in -0.3f64..0.3
        ) {
            // phase reaches ±10π at the edge for |a| = 5 on [−2π, 2π]
            let g = FrequencyGrid::new(2.0 * PI, 0.002).unwrap();
            let path = |u: f64| Complex64::new(r * (u.cos() - 1.0), a * u + b * u.powi(3) / (4.0 * PI * PI) + c * u.sin());
            let vals: Vec<_> = g.points().map(|u| path(u).exp()).collect();
            let l = distinguished_log(&vals, &g, 1e-3).unwrap();
            for (i, u) in g.points().enumerate() {
                let p = path(u);
                prop_assert!((l[i] - p).norm() < 1e-10 * (1.0 + p.norm()));
                prop_assert!(((l[i].exp() - vals[i]) / vals[i]).norm() < 1e-12);
            }
        }
    }
}
