use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("rejected input: {0}")]
    InvalidInput(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid integrability exponent {0}; expected a value in [1, ∞]")]
    InvalidExponent(f64),

    #[error("symbol error: {0}")]
    Symbol(String),

    #[error("shell index {j} outside [{min}, {max}]")]
    ShellOutOfRange { j: i32, min: i32, max: i32 },

    #[error("field is not mean-zero (|coeff(0)| = {0:e}); homogeneous norms are undefined at ξ = 0")]
    NotMeanZero(f64),

    #[error("empty shell {0}")]
    EmptyShell(i32),

    #[error("degenerate fit: {usable} usable shells, need at least 3")]
    DegenerateFit { usable: usize },

    #[error("divergence-free check failed: max |ξ_i ξ_j m_ij(ξ)|/|ξ|² = {residual:e} exceeds {tolerance:e} (∇ · u = 0)")]
    NotDivergenceFree { residual: f64, tolerance: f64 },

    #[error("CFL violation: dt = {dt:e} exceeds the advective limit {limit:e}; suggested dt = {suggested:e}")]
    Cfl { dt: f64, limit: f64, suggested: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("missing records: {0}")]
    MissingRecords(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
