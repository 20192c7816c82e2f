use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("disconnected graph")]
    Disconnected,

    #[error("malformed edge list: {0}")]
    MalformedEdges(String),

    #[error("invalid potential at vertex {vertex}: {value}")]
    InvalidPotential { vertex: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("zeta iteration did not converge: residual {residual:e} after {iterations} iterations")]
    NotConverged { residual: f64, iterations: usize },

    #[error("Herglotz sign lost at eta = {eta:e}")]
    HerglotzSignLost { eta: f64 },

    #[error("z_lambda undefined outside bulk")]
    NotBulk,

    #[error("band detection failed")]
    BandDetectionFailed,

    #[error("diagonal Green pole at vertex {0}")]
    DiagonalPole(usize),

    #[error("path is not a non-backtracking walk: {0}")]
    InvalidPath(String),

    #[error("radius {requested} exceeds the available radius {available}")]
    RadiusTooLarge { requested: usize, available: usize },

    #[error("graph has {n} vertices, above the dense eigensolver cap of {cap}; iterative mode is not supported")]
    TooLarge { n: usize, cap: usize },

    #[error("period {period} does not divide cycle length {n}")]
    PeriodMismatch { period: usize, n: usize },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by the input rather than by a failed computation.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Disconnected
                | Error::MalformedEdges(_)
                | Error::InvalidPotential { .. }
                | Error::InvalidParameter(_)
                | Error::NotBulk
                | Error::RadiusTooLarge { .. }
                | Error::TooLarge { .. }
                | Error::PeriodMismatch { .. }
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}
