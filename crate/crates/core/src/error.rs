use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("polynomial is not monic (leading coefficient {lead})")]
    NotMonic { lead: String },

    #[error("matrix is not unimodular (det = {det})")]
    NotUnimodular { det: String },

    #[error("precision exhausted at {bits} bits: {what}")]
    PrecisionExhausted { bits: u32, what: String },

    #[error("undecided: {0}")]
    Undecided(String),

    #[error("not hyperbolic: {0}")]
    NotHyperbolic(String),

    #[error("modulus class of size {size} is not supported")]
    ClassTooLarge { size: usize },

    #[error("work budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("rejection sampling starved: acceptance rate {rate:.2e} below floor {floor:.2e}")]
    RejectionStarved { rate: f64, floor: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("admissibility violated: {0}")]
    Admissibility(String),

    #[error("fit failed: best sup-error {best_error:.3e} above {target:.1e}")]
    FitFailed { best_error: f64, target: f64 },

    #[error("singular matrix")]
    Singular,

    #[error("point is not periodic with period {period}")]
    NotPeriodic { period: usize },

    #[error("cohomological equation has no solution: integral of phi is {mean:?}, not zero")]
    NonzeroMean { mean: [f64; 2] },

    #[error("vanishing denominator <k, v> = 0 at frequency {k:?}")]
    SmallDenominator { k: Vec<i64> },

    #[error("invariance check failed: residual {residual:.3e}")]
    InvarianceFailed { residual: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("horizon exceeds precision budget: {0}")]
    HorizonTooLong(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True for failures the caller may report as "undecided" rather than as an error.
    pub fn is_undecided(&self) -> bool {
        matches!(self, Error::PrecisionExhausted { .. } | Error::Undecided(_))
    }
}
