use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point {0} is outside the admissible disc")]
    OutsideDisc(num_complex::Complex64),

    #[error("fiber is not convex: {0}")]
    NotConvex(String),

    #[error("growth condition violated: {0}")]
    Growth(String),

    #[error("query lies outside the convex hull of the atoms")]
    Infeasible,

    #[error("norm family is not complex-homogeneous (max deviation {0:.3e})")]
    NotComplexHomogeneous(f64),

    #[error("fibers are not strictly convex (margin {0:.3e})")]
    NotStrictlyConvex(f64),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
