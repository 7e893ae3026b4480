use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EosError {
    #[error("index ({i}, {j}, {k}) out of bounds for grid {nx}x{ny}x{nz}")]
    IndexOutOfBounds {
        i: usize,
        j: usize,
        k: usize,
        nx: usize,
        ny: usize,
        nz: usize,
    },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("invalid time step: {0}")]
    InvalidStep(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("causality violation: read at t={requested} but newest stored level is t={newest}")]
    Causality { requested: f64, newest: f64 },
    #[error("history too short: read at t={requested} but oldest stored level is t={oldest}")]
    HistoryDepth { requested: f64, oldest: f64 },
    #[error("singular boundary system at surface point {patch} ({detail})")]
    SingularSystem { patch: usize, detail: String },
    #[error("point {0:?} is not strictly inside the box")]
    NotInside([f64; 3]),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error on {path}: {msg}")]
    Io { path: String, msg: String },
}

pub type Result<T> = std::result::Result<T, EosError>;
