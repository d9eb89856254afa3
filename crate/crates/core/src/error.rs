use thiserror::Error;

/// Everything that can go wrong between reading a configuration and
/// returning a converged height field.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("height {t} outside the profile domain ({lo}, {hi})")]
    Domain { t: f64, lo: f64, hi: f64 },

    #[error("warping profile invalid: {0}")]
    Profile(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("special frame undefined at node {node}: |grad z| = {grad_norm:e}")]
    Frame { node: usize, grad_norm: f64 },

    #[error("principal curvatures leave the admissible cone at node {node}")]
    Cone { node: usize },

    #[error("hypothesis ({hypothesis}) violated at t = {t}, u = {u:?}: {detail}")]
    Validation {
        hypothesis: String,
        t: f64,
        u: Vec<f64>,
        detail: String,
    },

    #[error("gauge function not decreasing at t = {t} (phi' = {dphi:e}); raise eps_phi")]
    Gauge { t: f64, dphi: f64 },

    #[error("no sign change of psi - k on [t_minus, t_plus] at node {node}")]
    Bisect { node: usize },

    #[error("Newton stalled at s = {s} after {iterations} iterations (residual {residual:e})")]
    NewtonStall {
        s: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("continuation stalled at s = {s}: step {ds:e} below minimum")]
    ContinuationStall { s: f64, ds: f64 },

    #[error("barrier violated at s = {s}, node {node}: z = {z} not in ({t_minus}, {t_plus})")]
    BarrierViolation {
        s: f64,
        node: usize,
        z: f64,
        t_minus: f64,
        t_plus: f64,
    },

    #[error("linear solve failed: {0}")]
    Linear(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code reported by the command-line front end. Stable.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Shape { .. } => exit::CONFIG,
            Error::Io(_) => exit::IO,
            Error::Validation { .. } => exit::VALIDATION,
            Error::Gauge { .. } => exit::GAUGE,
            Error::Bisect { .. } => exit::BISECT,
            Error::Domain { .. } | Error::Profile(_) | Error::Frame { .. } => exit::DOMAIN,
            Error::NewtonStall { .. } | Error::Linear(_) => exit::NEWTON_STALL,
            Error::ContinuationStall { .. } => exit::CONTINUATION_STALL,
            Error::BarrierViolation { .. } => exit::BARRIER_VIOLATION,
            Error::Cone { .. } => exit::CONE,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Exit codes of the `weingarten` binary.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CHECKS_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const VALIDATION: i32 = 3;
    pub const GAUGE: i32 = 4;
    pub const BISECT: i32 = 5;
    pub const DOMAIN: i32 = 6;
    pub const IO: i32 = 7;
    pub const NEWTON_STALL: i32 = 10;
    pub const CONTINUATION_STALL: i32 = 11;
    pub const BARRIER_VIOLATION: i32 = 12;
    pub const CONE: i32 = 13;
}
