//! Nonparametric inference for discretely observed compound Poisson processes.

pub mod asymptotics;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod measure;
pub mod model;
pub mod spectral;

pub use error::{Error, Result};
