use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("atomic measure needs at least one atom")]
    EmptyAtoms,
    #[error("atom weight must be strictly positive and finite, got {0}")]
    NonPositiveWeight(f64),
    #[error("atom position must be finite, got {0}")]
    NonFinitePosition(f64),
    #[error("unknown parametric family `{0}`")]
    UnknownFamily(String),
    #[error("invalid parameters for {family}: {reason}")]
    InvalidParameter { family: &'static str, reason: String },
    #[error("degenerate measure: variance is {0}")]
    Degenerate(f64),
    #[error("scale factor must be strictly positive, got {0}")]
    NonPositiveScale(f64),
    #[error("moment order {0} is not supported (1..=4)")]
    UnsupportedOrder(u32),
    #[error("exponent s = {0} is not supported (expected 2 or 3)")]
    UnsupportedExponent(f64),
    #[error("measure is not in Q_{r}: mean {mean}, variance {variance}, E|X|^r = {abs_moment}")]
    NotInQ { r: f64, mean: f64, variance: f64, abs_moment: f64 },
    #[error("third absolute moment is infinite")]
    InfiniteThirdMoment,
    #[error("sample list is empty")]
    EmptySamples,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("measures are indistinguishable at tolerance: distance {0}")]
    Indistinguishable(f64),
    #[error("iteration count {requested} exceeds the limit {limit}")]
    TooManySteps { requested: u32, limit: u32 },
    #[error("cannot sample: {0}")]
    Unsampleable(String),
    #[error("Monte Carlo check needs at least {required} samples, got {got}")]
    InsufficientSamples { required: usize, got: usize },
}
