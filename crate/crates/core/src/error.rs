use thiserror::Error;

/// Errors raised by the construction, its evaluators and the certification pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("schedule has no stages")]
    EmptySchedule,
    #[error("no reduced fraction with denominator {q} lies strictly inside the previous interval")]
    NoAdmissibleNumerator { q: String },
    #[error("prerequisite violated: {0}")]
    PrereqViolated(String),
    #[error("amplitude is zero, any interval works")]
    DegenerateAmplitude,
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("quadrature with {points} points is below the resolution threshold {required}")]
    UnderResolved { points: usize, required: usize },
    #[error("quadrature needs {required} points, budget is {budget}")]
    InfeasibleQuadrature { required: u64, budget: u64 },
    #[error("small divisor vanishes at frequency {frequency}")]
    SmallDivisorZero { frequency: i64 },
    #[error("frequency {0} exceeds the exactly representable range of the evaluators")]
    FrequencyOverflow(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
