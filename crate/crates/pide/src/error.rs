use thiserror::Error;

/// Errors surfaced by grid construction, operator application and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension out of range: d1={d1}, d2={d2} (need d1+d2 in {{1,2}}, each in {{0,1}})")]
    DimensionOutOfRange { d1: usize, d2: usize },
    #[error("grid size {0} is not a power of two >= 8")]
    NotPowerOfTwo(usize),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("block {0} selects no axis on this grid")]
    EmptyBlock(String),
    #[error("inner cut {delta_cut} exceeds grid spacing {h}")]
    InnerCutTooLarge { delta_cut: f64, h: f64 },
    #[error("truncation radius {0} must be >= 1")]
    TruncationTooSmall(f64),
    #[error("beta = {0} outside the admissible range (1,2)")]
    BetaOutOfRange(f64),
    #[error("gradient exponent k = {0} must be >= 0")]
    NegativeExponent(f64),
    #[error("all stability rates vanish: time step is unbounded (degenerate problem)")]
    DegenerateRate,
    #[error("time step {dt} violates the CFL bound {bound}")]
    CflViolation { dt: f64, bound: f64 },
    #[error("solution blow-up: sup norm {sup} exceeded guard {guard} at t = {t}")]
    BlowUp { sup: f64, guard: f64, t: f64 },
    #[error("iteration budget {max_iter} exhausted, last residual {residual}")]
    MaxIterExceeded { max_iter: usize, residual: f64 },
    #[error("need at least {need} {what}, got {got}")]
    TooFew { what: &'static str, need: usize, got: usize },
    #[error("delta schedule must be positive and strictly decreasing")]
    BadSchedule,
    #[error("spectral discretization requires the identity jump")]
    SpectralNeedsIdentityJump,
    #[error("quadrature blocks must be one-dimensional on this grid")]
    QuadratureBlockTooWide,
    #[error("grids do not match")]
    GridMismatch,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("config error at {pointer}: {message}")]
    Config { pointer: String, message: String },
    #[error("unknown example id '{0}'")]
    UnknownExample(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
