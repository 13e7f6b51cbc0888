use thiserror::Error;

/// Errors raised anywhere in the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("model assumption violated: {0}")]
    Assumption(String),

    #[error("|phi_n(u)| = {modulus:.3e} < kappa = {kappa:.3e} at u = {u}; distinguished logarithm refused")]
    BranchAmbiguity { u: f64, modulus: f64, kappa: f64 },

    #[error("successive ratio deviates by {deviation:.3} from 1 at u = {u}; phase unwrapping unreliable")]
    PhaseJump { u: f64, deviation: f64 },

    #[error("imaginary residual {imag:.3e} exceeds tolerance for real part {real:.3e}")]
    SymmetryViolation { real: f64, imag: f64 },

    #[error("kernel constant c = {0:.3e} is too close to zero")]
    KernelDegenerate(f64),

    #[error("atom index {index} lies outside the window |j| <= {limit}")]
    IndexOutOfWindow { index: i64, limit: i64 },

    #[error("division by near-zero quantity ({what} = {value:.3e})")]
    DivisionByNearZero { what: &'static str, value: f64 },

    #[error("weight {0} is not supported by this operation")]
    UnsupportedWeight(String),

    #[error("operation requires the drift-free frame (drift shift = {0})")]
    NonzeroDrift(f64),

    #[error("covariance matrix is not positive semidefinite even after jitter")]
    NotPsd,

    #[error("too many refused replicates: {refused} of {total}")]
    TooManyRefusals { refused: usize, total: usize },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for the refusals a caller should count rather than abort on.
    pub fn is_refusal(&self) -> bool {
        matches!(
            self,
            Error::BranchAmbiguity { .. }
                | Error::PhaseJump { .. }
                | Error::SymmetryViolation { .. }
                | Error::DivisionByNearZero { .. }
        )
    }

    /// Process exit code of the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            e if e.is_refusal() => 3,
            Error::TooManyRefusals { .. } => 3,
            Error::Io(_) => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
