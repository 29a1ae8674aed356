use thiserror::Error;

/// Errors raised by the workbench.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument out of validated range: {0}")]
    OutOfRange(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("value overflows f64: {0}")]
    Overflow(String),

    #[error("Debye formula outside its regime: alpha = {alpha} < 0.1")]
    DebyeRegime { alpha: f64 },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("grid too coarse: spacing {spacing} exceeds 2*pi/(10*lambda) = {limit} at lambda = {lambda}")]
    Resolution { spacing: f64, limit: f64, lambda: f64 },

    #[error("system is numerically singular or failed to converge: {detail} (condition estimate {condition:.3e})")]
    SingularSystem { detail: String, condition: f64 },

    #[error("angular grids do not match: {0}")]
    GridMismatch(String),

    #[error("band node |xi| = {norm} is not strictly inside 2*lambda = {limit}")]
    DegenerateBand { norm: f64, limit: f64 },

    #[error("radial integrator could not meet tolerance at n = {n}, lambda = {lambda}: {detail}")]
    Stiffness { n: i64, lambda: f64, detail: String },

    #[error("mismatched inputs: {0}")]
    Mismatch(String),

    #[error("mode/threshold condition violated: {0}")]
    Threshold(String),

    #[error("monotone hypothesis violated: min difference {min_value:.3e} at r = {at}")]
    Monotonicity { min_value: f64, at: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
