use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("denominator `{0}` vanishes")]
    ZeroDenominator(&'static str),

    #[error("Riccati problem is ill-posed: {0}")]
    IllPosed(String),

    #[error("time {t} lies outside [0, {horizon}]")]
    OutOfDomain { t: f64, horizon: f64 },

    #[error("bad grid: {0}")]
    BadGrid(String),

    #[error("model fails validation: {}", .0.join("; "))]
    InvalidModel(Vec<String>),

    #[error("central-planner social cost {0} is not positive")]
    DegenerateCost(f64),

    #[error("Runge-Kutta solution blew up near t = {t}")]
    Blowup { t: f64 },

    #[error("incompatible grids: {0}")]
    IncompatibleGrid(String),

    #[error("invalid Monte Carlo configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("sweep tail is insufficient: {0}")]
    InsufficientTail(String),

    #[error("cannot parse model: {0}")]
    Parse(String),
}
