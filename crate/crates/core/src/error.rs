use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoError {
    #[error("{samples} samples cannot resolve modes up to {max_mode} (need at least {needed})")]
    Aliasing {
        samples: usize,
        max_mode: usize,
        needed: usize,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected truncation {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("map is not uniformly expanding: min |T'| after coupling is {sigma_prime}")]
    NotExpanding { sigma_prime: f64 },
    #[error("mean-field map is not a diffeomorphism: min derivative {min_derivative}")]
    NotDiffeomorphism { min_derivative: f64 },
    #[error("quadrature check failed: {0}")]
    Quadrature(String),
    #[error("mass drift {drift:e} exceeds tolerance")]
    MassDrift { drift: f64 },
    #[error(
        "barycenter is degenerate (W = {weight:e}); the variance-coupling derivative is undefined"
    )]
    DegenerateBarycenter { weight: f64 },
    #[error("density is not a fixed point (W11 residual {residual:e})")]
    NotFixedPoint { residual: f64 },
    #[error("no contracting Lasota-Yorke fit (best lambda {best_lambda})")]
    LyFitFailed { best_lambda: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, StoError>;
