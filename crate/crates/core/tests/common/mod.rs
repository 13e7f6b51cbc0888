#![allow(dead_code)]

use std::f64::consts::PI;

use decompound::measure::{DensityGrid, SignedMeasure};
use decompound::spectral::{
    distinguished_log, spectral_integral, spectral_sum, weight_transform, FrequencyGrid, Hyperparameters, KernelSpec, WeightKind,
};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub const SPACING: f64 = 0.5;
pub const CELL: f64 = 0.125;

/// Random signed measure on the lattice `0.5ℤ` with an optional density on
/// cells of width `0.125`.
pub fn arb_measure() -> impl Strategy<Value = SignedMeasure> {
    (
        prop::collection::vec((-4i64..=4, -1.0f64..1.0), 0..4),
        prop::option::of((-8i64..=8, prop::collection::vec(-0.8f64..0.8, 1..6))),
    )
        .prop_map(|(atoms, density)| {
            let m = SignedMeasure::from_atoms(SPACING, atoms);
            match density {
                Some((start, values)) => m.with_density(DensityGrid::new(start, CELL, values).unwrap()).unwrap(),
                None => m,
            }
        })
}

pub fn distance(a: &SignedMeasure, b: &SignedMeasure) -> f64 {
    a.add(&b.scaled(-1.0)).unwrap().total_variation()
}

fn scale_of(ms: &[&SignedMeasure]) -> f64 {
    ms.iter().map(|m| 1.0 + m.total_variation()).product()
}

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() })
}

fn report<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
    r.map_err(|e| format!("{e}"))
}

fn check(cond: bool, msg: String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg))
    }
}

pub fn commutativity(cases: u32) -> Result<(), String> {
    report(runner(cases).run(&(arb_measure(), arb_measure()), |(a, b)| {
        let d = distance(&a.convolve(&b).unwrap(), &b.convolve(&a).unwrap());
        check(d <= 1e-12 * scale_of(&[&a, &b]), format!("a∗b − b∗a = {d}"))
    }))
}

pub fn associativity(cases: u32) -> Result<(), String> {
    report(runner(cases).run(&(arb_measure(), arb_measure(), arb_measure()), |(a, b, c)| {
        let left = a.convolve(&b).unwrap().convolve(&c).unwrap();
        let right = a.convolve(&b.convolve(&c).unwrap()).unwrap();
        let d = distance(&left, &right);
        check(d <= 1e-12 * scale_of(&[&a, &b, &c]), format!("(a∗b)∗c − a∗(b∗c) = {d}"))
    }))
}

pub fn mass_multiplicativity(cases: u32) -> Result<(), String> {
    report(runner(cases).run(&(arb_measure(), arb_measure()), |(a, b)| {
        let m = a.convolve(&b).unwrap().mass();
        let d = (m - a.mass() * b.mass()).abs();
        check(d <= 1e-12 * scale_of(&[&a, &b]), format!("mass defect {d}"))
    }))
}

pub fn exponential_inverse(cases: u32) -> Result<(), String> {
    report(runner(cases).run(&(arb_measure(), 0.05f64..1.0), |(m, s)| {
        let tol = 1e-13;
        let prod = m.conv_exp(s, tol).convolve(&m.conv_exp(-s, tol)).unwrap();
        let d = distance(&prod, &SignedMeasure::dirac(SPACING, 0, 1.0));
        let bound = 1e-9 * (2.0 * s * m.total_variation()).exp();
        check(d <= bound, format!("exp(sm)∗exp(−sm) − δ₀ = {d}"))?;
        let mass = m.conv_exp(s, tol).mass();
        check((mass - (s * m.mass()).exp()).abs() <= bound, format!("mass {mass} vs {}", (s * m.mass()).exp()))
    }))
}

pub fn log_round_trip(cases: u32) -> Result<(), String> {
    let g = FrequencyGrid::new(2.0 * PI, 0.002).unwrap();
    let strategy = (-5.0f64..5.0, -0.5f64..0.5, -2.0f64..2.0, -0.3f64..0.3);
    report(runner(cases).run(&strategy, |(a, b, c, r)| {
        // slope ±5 reaches a winding of ±10π at u = ±2π
        let path = |u: f64| Complex64::new(r * (u.cos() - 1.0), a * u + b * u.powi(3) / (4.0 * PI * PI) + c * u.sin());
        let vals: Vec<_> = g.points().map(|u| path(u).exp()).collect();
        let l = distinguished_log(&vals, &g, 1e-3).map_err(|e| TestCaseError::fail(e.to_string()))?;
        for (i, u) in g.points().enumerate() {
            let p = path(u);
            check((l[i] - p).norm() < 1e-10 * (1.0 + p.norm()), format!("log error at u = {u}"))?;
        }
        Ok(())
    }))
}

fn quadrature_hp() -> Hyperparameters {
    Hyperparameters { n: 1000, atom_spacing: 1.0, bandwidth: 0.001, window: 0.1, truncation: 5.5, q_window: 3.0 }
}

const KINDS: [WeightKind; 6] =
    [WeightKind::Lambda, WeightKind::Gamma, WeightKind::Qj { j: 1 }, WeightKind::Q, WeightKind::N { t: 0.4 }, WeightKind::N { t: 2.3 }];

fn random_log(lambda: f64, w: f64, gamma: f64) -> impl Fn(f64) -> Complex64 {
    move |u: f64| Complex64::new(0.0, gamma * u) + lambda * (w * Complex64::cis(u) + (1.0 - w) * Complex64::cis(-2.0 * u) - 1.0)
}

/// Largest conjugate-symmetry residual `|Im| / max(|Re|, 10⁻⁴ Σ|terms|)` over
/// random log paths and every weight.
pub fn conjugate_symmetry(cases: u32) -> Result<f64, String> {
    let hp = quadrature_hp();
    let kernel = KernelSpec::default();
    let grid = FrequencyGrid::for_hyperparameters(&hp, 16.0).unwrap();
    let weights: Vec<_> = KINDS.iter().map(|&k| weight_transform(k, &hp, &kernel).unwrap()).collect();
    let worst = std::cell::Cell::new(0.0f64);
    report(runner(cases).run(&(0.1f64..1.5, 0.0f64..1.0, -1.0f64..1.0), |(lambda, w, gamma)| {
        let phi: Vec<_> = grid.points().map(|u| random_log(lambda, w, gamma)(u).exp()).collect();
        let vals = distinguished_log(&phi, &grid, 1e-3).map_err(|e| TestCaseError::fail(e.to_string()))?;
        for wt in &weights {
            let s = spectral_sum(wt, &vals, &grid, &kernel, hp.bandwidth, 1.0).unwrap();
            worst.set(worst.get().max(s.residual()));
            check(s.residual() < 1e-8, format!("residual {}", s.residual()))?;
        }
        Ok(())
    }))?;
    Ok(worst.get())
}

/// Largest relative change of every weight's integral when the grid step is
/// halved.
pub fn quadrature_halving(cases: u32) -> Result<f64, String> {
    let hp = quadrature_hp();
    let kernel = KernelSpec::default();
    let coarse = FrequencyGrid::for_hyperparameters(&hp, 16.0).unwrap();
    let fine = coarse.refined();
    let weights: Vec<_> = KINDS.iter().map(|&k| weight_transform(k, &hp, &kernel).unwrap()).collect();
    let worst = std::cell::Cell::new(0.0f64);
    report(runner(cases).run(&(0.1f64..1.5, 0.0f64..1.0, -1.0f64..1.0), |(lambda, w, gamma)| {
        let log = random_log(lambda, w, gamma);
        let a_vals: Vec<_> = coarse.points().map(&log).collect();
        let b_vals: Vec<_> = fine.points().map(&log).collect();
        for wt in &weights {
            let a = spectral_integral(wt, &a_vals, &coarse, &kernel, hp.bandwidth, 1.0).unwrap();
            let b = spectral_integral(wt, &b_vals, &fine, &kernel, hp.bandwidth, 1.0).unwrap();
            let rel = (a - b).abs() / b.abs().max(1e-3);
            worst.set(worst.get().max(rel));
            check(rel < 1e-6, format!("{a} vs {b}"))?;
        }
        Ok(())
    }))?;
    Ok(worst.get())
}
