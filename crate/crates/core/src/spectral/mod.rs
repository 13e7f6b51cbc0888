//! Frequency-domain machinery shared by every estimator.

pub mod config;
pub mod ecf;
pub mod grid;
pub mod kernel;
pub mod quadrature;
pub mod unwrap;
pub mod weights;

pub use config::{Hyperparameters, RegimeReport, Schedule, SpectralConfig};
pub use ecf::ecf;
pub use grid::FrequencyGrid;
pub use kernel::KernelSpec;
pub use quadrature::{spectral_integral, spectral_sum, SpectralPath, SpectralSum};
pub use unwrap::distinguished_log;
pub use weights::{weight_transform, WeightKind, WeightTransform};
