use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: String,
        got: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{name} is not positive semi-definite (smallest eigenvalue {min_eig:e}, largest |eigenvalue| {max_abs_eig:e})")]
    NotPsd {
        name: &'static str,
        min_eig: f64,
        max_abs_eig: f64,
    },

    #[error("matrix is rank deficient: smallest singular value {sigma_min:e} <= {tol:e} (largest {sigma_max:e})")]
    RankDeficient {
        sigma_min: f64,
        sigma_max: f64,
        tol: f64,
    },

    #[error("covariance collapsed: largest eigenvalue {0:e} is not positive")]
    CovarianceCollapsed(f64),

    #[error("degenerate polygon {id}: area {area:e}")]
    DegeneratePolygon { id: String, area: f64 },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    #[error("{0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn dim(context: &'static str, expected: impl ToString, got: impl ToString) -> Self {
        Error::Dimension {
            context,
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }
}
