use alloc::vec::Vec;
use core::fmt;

/// Errors raised by the tomography core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension {dim}: {reason}")]
    InvalidDimension { dim: usize, reason: &'static str },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("truncation leakage {leakage:.3e} exceeds {limit:.1e}; a dimension of at least {required_dim} is needed")]
    Truncation {
        leakage: f64,
        limit: f64,
        required_dim: usize,
    },

    #[error("ordering parameter s = {s} is not admissible for eta = {eta}, delta = {delta}: {range}")]
    Inadmissible {
        s: f64,
        eta: f64,
        delta: f64,
        range: SRange,
    },

    #[error("invalid density matrix: {0}")]
    Validation(ValidationError),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("measurement table does not match the reconstruction input: {0}")]
    TableMismatch(&'static str),

    #[error("{what} did not converge within {limit}")]
    Convergence { what: &'static str, limit: usize },
}

impl Error {
    /// True for failures of an iterative or adaptive procedure, as opposed to bad input.
    pub fn is_convergence(&self) -> bool {
        matches!(self, Error::Convergence { .. })
    }
}

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValidationError {
    NotSquare { rows: usize, cols: usize },
    NotHermitian { defect: f64 },
    Trace { trace: f64 },
    Negative { min_eigenvalue: f64 },
    NonFinite,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationError::NotSquare { rows, cols } => write!(f, "matrix is {rows}x{cols}"),
            ValidationError::NotHermitian { defect } => {
                write!(f, "not Hermitian (max |rho - rho^dag| = {defect:.3e})")
            }
            ValidationError::Trace { trace } => write!(f, "trace {trace} is not 1"),
            ValidationError::Negative { min_eigenvalue } => {
                write!(f, "negative eigenvalue {min_eigenvalue:.3e}")
            }
            ValidationError::NonFinite => write!(f, "non-finite entry"),
        }
    }
}

/// The set of ordering parameters for which the sampling kernel stays bounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SRange {
    Empty,
    /// The half-open interval `(lower, upper]`.
    HalfOpen { lower: f64, upper: f64 },
}

impl SRange {
    pub fn contains(&self, s: f64) -> bool {
        match *self {
            SRange::Empty => false,
            SRange::HalfOpen { lower, upper } => s > lower && s <= upper,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, SRange::Empty)
    }

    pub fn midpoint(&self) -> Option<f64> {
        match *self {
            SRange::Empty => None,
            SRange::HalfOpen { lower, upper } => Some(0.5 * (lower + upper)),
        }
    }
}

impl fmt::Display for SRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SRange::Empty => write!(f, "admissible range is empty"),
            SRange::HalfOpen { lower, upper } => write!(f, "admissible range is ({lower}, {upper}]"),
        }
    }
}

/// Non-fatal conditions attached to a result.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// A displacement with `|alpha|^2` beyond the cutoff; the truncated matrix is far from unitary.
    SevereTruncation { alpha_sq: f64, dim: usize },
    /// A squeeze whose photon spread `e^{2|zeta|}` exceeds the cutoff.
    SqueezeTruncation { spread: f64, dim: usize },
    /// Probability mass above the photon cutoff.
    TailMass { node: usize, tail: f64 },
    /// Loss inversion requested at `eta <= 0.5`, where the alternating series is not absolutely summable.
    LowEfficiencyInversion { eta: f64 },
    /// `|base| = 1`: the photon sum of the kernel does not decay.
    BoundaryOrdering { base: f64 },
    /// Counts above the photon cutoff were dropped from the table.
    Overflow { node: usize, fraction: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::SevereTruncation { alpha_sq, dim } => {
                write!(f, "|alpha|^2 = {alpha_sq:.3} exceeds the cutoff {dim}")
            }
            Warning::SqueezeTruncation { spread, dim } => {
                write!(f, "squeeze spread e^(2|zeta|) = {spread:.3} exceeds the cutoff {dim}")
            }
            Warning::TailMass { node, tail } => {
                write!(f, "node {node}: {tail:.3e} probability above the photon cutoff")
            }
            Warning::LowEfficiencyInversion { eta } => write!(
                f,
                "loss inversion at eta = {eta} <= 0.5 is not absolutely convergent; expect noise amplification"
            ),
            Warning::BoundaryOrdering { base } => write!(
                f,
                "kernel base |{base:.6}| = 1: photon sum does not decay, truncation error is not controlled"
            ),
            Warning::Overflow { node, fraction } => {
                write!(f, "node {node}: {fraction:.3e} of counts above the photon cutoff were dropped")
            }
        }
    }
}

/// A value together with the warnings produced while computing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Flagged<T> {
    pub value: T,
    pub warnings: Vec<Warning>,
}

impl<T> Flagged<T> {
    pub fn clean(value: T) -> Self {
        Flagged {
            value,
            warnings: Vec::new(),
        }
    }

    pub fn into_value(self) -> T {
        self.value
    }
}
