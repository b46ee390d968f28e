use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("not a canonical rational: {0:?}")]
    Parse(String),
    #[error("rational {0} is outside [0, 1]")]
    OutOfUnit(String),
    #[error("bracket of width {width} is not narrower than 1/(2M)")]
    BracketTooWide { width: String },
    #[error("duplicate node {0}")]
    DuplicateNode(String),
    #[error("target {0} is not bracketed by p(0), p(1)")]
    NotBracketed(String),
    #[error("polynomial is not certified strictly increasing on [0,1]")]
    NotMonotone,
    #[error("denominator vanishes in [0,1]")]
    PoleInUnit,
    #[error("enumeration must begin 0, 1")]
    BadEnumeration,
    #[error("lexicographic index of a rational of height {0} does not fit in 64 bits")]
    IndexTooLarge(String),
    #[error("step {step} requires exponent {exponent} beyond the budget {budget}")]
    ScheduleOverflow {
        step: u64,
        exponent: String,
        budget: u64,
    },
    #[error("stage {stage}: {reason}")]
    StageTooLarge { stage: u64, reason: String },
    #[error("threshold {requested} exceeds the current stage threshold {available}")]
    StageTooShallow { requested: u64, available: u64 },
    #[error("invariant violated at step {step}: {what}")]
    Invariant { step: u64, what: String },
    #[error("trace is malformed: {0}")]
    Trace(String),
    #[error("replay diverges from the trace at step {step}: {what}")]
    ReplayDivergence { step: u64, what: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
