use thiserror::Error;

/// Errors raised by the laboratory's constructors, solvers and analysers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid model parameters: {0}")]
    InvalidModel(String),

    #[error("nonlinearity violates (G2): {0}")]
    G2Violation(String),

    #[error("no positive eigenvalue: R0 = {r0} <= 1")]
    NoPositiveEigenvalue { r0: f64 },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid initial data: {0}")]
    InvalidInitialData(String),

    #[error("stability bound violated: {0}")]
    Stability(String),

    #[error("solver abort at t = {t}: {reason}")]
    SolverAbort { t: f64, reason: String },

    #[error("kernel {kernel} fails the finite first-moment condition; a semi-wave exists only if both J1 and J2 have finite first moment")]
    InfiniteFirstMoment { kernel: String },

    #[error("profile iteration did not converge in {iterations} iterations (last change {last_change:e})")]
    NonConvergence {
        iterations: usize,
        last_change: f64,
        history: Vec<f64>,
    },

    #[error("no sign change of the speed mismatch on [{lo}, {hi}] (values {f_lo:e}, {f_hi:e}); widen the bracket")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("point outside the envelope domain: {0}")]
    OutOfDomain(String),

    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),

    #[error("alpha = {0} outside (1, 2]: the kernel has finite first moment, so the spreading speed is finite")]
    FiniteSpeedRegime(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed csv at line {line}: {reason}")]
    Csv { line: u64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
