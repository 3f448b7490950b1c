use thiserror::Error;

/// Failure modes shared by every module. `code()` gives the stable
/// upper-case identifier used in reports and JSON output.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("input series has a nonzero constant term")]
    OrderZeroInput,
    #[error("divisor is not regular in the distinguished variable: {0}")]
    NotRegular(String),
    #[error("series vanishes within its validity")]
    ZeroSeries,
    #[error("partition rule assigned {0} to more than one basis element")]
    PartitionViolation(String),
    #[error("determinant vanishes within validity")]
    SingularWithinValidity,
    #[error("matrix rank is below the target within validity")]
    RankDeficientWithinValidity,
    #[error("base ring already carries a nilpotent; dual-number tangent unavailable")]
    RingBusy,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("working bound too small to certify the window: {0}")]
    WindowInsufficient(String),
    #[error("pivot {0} is not a unit")]
    NonUnitPivot(String),
    #[error("map is not contractive: {0}")]
    NotContractive(String),
    #[error("fixed-point iteration exceeded its budget of {0} steps")]
    BudgetExceeded(usize),
    #[error("order condition fails: {0}")]
    OrderConditionFailed(String),
    #[error("linearization probe failed: {0}")]
    LinearizationProbeFailed(String),
    #[error("indeterminate: {0}")]
    Indeterminate(String),
    #[error("obstructed: {0}")]
    Obstructed(String),
    #[error("representation does not reproduce F(x,0): {0}")]
    RepresentationInvalid(String),
    #[error("precondition gap: {0}")]
    PreconditionGap(String),
    #[error("not monic: {0}")]
    NotMonic(String),
    #[error("condition {0} violated")]
    ConditionsViolated(String),
    #[error("unknown suite {0}")]
    UnknownSuite(String),
    #[error("input validity too low: {0}")]
    InsufficientValidity(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::OrderZeroInput => "ORDER_ZERO_INPUT",
            Error::NotRegular(_) => "NOT_REGULAR",
            Error::ZeroSeries => "ZERO_SERIES",
            Error::PartitionViolation(_) => "PARTITION_VIOLATION",
            Error::SingularWithinValidity => "SINGULAR_WITHIN_VALIDITY",
            Error::RankDeficientWithinValidity => "RANK_DEFICIENT_WITHIN_VALIDITY",
            Error::RingBusy => "RING_BUSY",
            Error::Unsupported(_) => "UNSUPPORTED",
            Error::DomainMismatch(_) => "DOMAIN_MISMATCH",
            Error::WindowInsufficient(_) => "WINDOW_INSUFFICIENT",
            Error::NonUnitPivot(_) => "NON_UNIT_PIVOT",
            Error::NotContractive(_) => "NOT_CONTRACTIVE",
            Error::BudgetExceeded(_) => "BUDGET_EXCEEDED",
            Error::OrderConditionFailed(_) => "ORDER_CONDITION_FAILED",
            Error::LinearizationProbeFailed(_) => "LINEARIZATION_PROBE_FAILED",
            Error::Indeterminate(_) => "INDETERMINATE",
            Error::Obstructed(_) => "OBSTRUCTED",
            Error::RepresentationInvalid(_) => "REPRESENTATION_INVALID",
            Error::PreconditionGap(_) => "PRECONDITION_GAP",
            Error::NotMonic(_) => "NOT_MONIC",
            Error::ConditionsViolated(_) => "CONDITIONS_VIOLATED",
            Error::UnknownSuite(_) => "UNKNOWN_SUITE",
            Error::InsufficientValidity(_) => "INSUFFICIENT_VALIDITY",
            Error::Parse(_) => "PARSE",
            Error::Io(_) => "IO",
        }
    }

    /// Mathematical outcomes exit with 2, everything else the user can fix
    /// exits with 3.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Obstructed(_) | Error::ConditionsViolated(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
