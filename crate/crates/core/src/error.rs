use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config parse error: {0}")]
    Parse(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("UAV placement failed after {attempts} attempts (area too small for the safety distance?)")]
    PlacementFailed { attempts: usize },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("coincident points: propagation distance must be positive, got {0}")]
    CoincidentPoints(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("correlation matrix not PSD: minimum eigenvalue {0:e}")]
    Factorization(f64),

    #[error("infeasible association: {0}")]
    InfeasibleAssociation(String),

    #[error("UAV {uav} coincides with user {user}")]
    ZeroDistance { uav: usize, user: usize },

    #[error("instance too large for enumeration: M={users}, U={uavs}")]
    TooLarge { users: usize, uavs: usize },

    #[error("malformed csv: {0}")]
    MalformedCsv(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("rows from different configs cannot be aggregated: {0:?}")]
    MixedConfigs(Vec<String>),

    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),
}

pub type Result<T> = std::result::Result<T, Error>;
