use thiserror::Error;

/// Errors produced by the capacity library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("not Hermitian (max asymmetry {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("unsupported 3×3 shape: only a 2×2 block plus a scalar is supported")]
    UnsupportedShape,

    #[error("outside Bloch ball (|w| = {norm})")]
    OutsideBlochBall { norm: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("{name} = {value} is outside {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Kraus operators are not trace preserving: max deviation {max_deviation:.6}")]
    NotTracePreserving { max_deviation: f64 },

    #[error("malformed Kraus set: {0}")]
    Structural(String),

    #[error("unitality undefined across dimensions ({dim_in} -> {dim_out})")]
    UnitalityUndefined { dim_in: usize, dim_out: usize },

    #[error("no qubit affine form for a {dim_in} -> {dim_out} channel")]
    NoAffineForm { dim_in: usize, dim_out: usize },

    #[error("{operation} is not supported for {kind}")]
    UnsupportedKind {
        operation: &'static str,
        kind: String,
    },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown channel kind `{0}`")]
    UnknownKind(String),

    #[error("channel file parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
