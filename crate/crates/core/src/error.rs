use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    BadGrid(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameters: {0}")]
    BadParams(String),

    #[error("invariant {0} is only defined for b = d")]
    NotHamiltonian(&'static str),

    #[error("generating pair is not zero-stable: {0}")]
    NotZeroStable(String),

    #[error("generating pair is inconsistent: {0}")]
    InconsistentPair(String),

    #[error("generating pair is reducible: rho and sigma share a common factor")]
    Reducible,

    #[error("partition orders differ: p has order {p}, q has order {q}")]
    OrderMismatch { p: usize, q: usize },

    #[error("unknown method '{0}'")]
    UnknownMethod(String),

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    FixedPointDiverged { iterations: usize, residual: f64 },

    #[error("starting procedure needs an exact solution but none is available")]
    NoExactSolution,

    #[error("history holds {got} states but the method needs {needed}")]
    ShortHistory { needed: usize, got: usize },

    #[error("solution blew up at t = {t} (max norm {norm:e})")]
    BlowUp { t: f64, norm: f64 },

    #[error("reference step too coarse: step-doubling estimate {estimate:e} exceeds {limit:e}")]
    ReferenceTooCoarse { estimate: f64, limit: f64 },

    #[error("probe time {0} is not a recorded time")]
    MissingProbe(f64),

    #[error("degenerate fit window: {0}")]
    DegenerateWindow(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("csv parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, got })
    }
}
