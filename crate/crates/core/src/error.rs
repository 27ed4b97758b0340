use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("invalid sphere point: norm {norm} is not 1 (length {len})")]
    InvalidState { norm: f64, len: usize },

    #[error("cannot project the zero vector onto the sphere")]
    Degenerate,

    #[error("grid of {n_grid} points cannot resolve {modes} modes (need at least {required})")]
    Resolution {
        n_grid: usize,
        modes: usize,
        required: usize,
    },

    #[error("root bracket not found: F stayed positive up to alpha = {upper:e}")]
    Bracket { upper: f64 },

    #[error("Nelder-Mead did not converge after {iterations} iterations (best value {best_value})")]
    Optimization {
        iterations: usize,
        best_value: f64,
        best_point: Vec<f64>,
    },

    /// A proposed point beat the precomputed rejection constant.
    #[error("rejection constant violated: log ratio {log_ratio} exceeds log M {log_m}")]
    ConstantViolation {
        log_ratio: f64,
        log_m: f64,
        point: Vec<f64>,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}
