use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("state {state:?} is outside the strictly hyperbolic region ({reason})")]
    NotHyperbolic { state: [f64; 4], reason: String },

    #[error("eigenvector normalization degenerates at phi2 = {phi2:e} (|phi2| < {eps:e}); use the regularized pair")]
    DegenerateNormalization { phi2: f64, eps: f64 },

    #[error("state left the ball |Phi| < {radius} (|Phi| = {norm}) at {location}")]
    BallExit {
        norm: f64,
        radius: f64,
        location: String,
    },

    #[error("CFL violated: dt = {dt:e} exceeds limit {limit:e}")]
    Cfl { dt: f64, limit: f64 },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("characteristic left the grid: family {family}, seed {seed}, t = {t}")]
    CurveExit { family: usize, seed: f64, t: f64 },

    #[error("no intersection of the two characteristics in the traced window")]
    NoIntersection,

    #[error("no shock detected in window: {0}")]
    NoShock(String),

    #[error("under-resolved: {0}")]
    UnderResolved(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
