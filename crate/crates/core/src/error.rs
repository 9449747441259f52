use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("half particle count n must be at least 1")]
    ZeroSize,

    #[error("probability {value} outside {range}")]
    Probability { value: f64, range: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("trajectory did not reach extinction within {steps} steps")]
    NotReached { steps: u64 },

    #[error("operation requires a star-graph trajectory")]
    NotStar,

    #[error("operation requires a trajectory recorded with series")]
    MissingSeries,

    #[error("horizon {0} must be a positive even integer")]
    OddHorizon(u64),

    #[error("sample set is empty")]
    EmptySample,

    #[error("degenerate fit grid: {0}")]
    DegenerateGrid(String),

    #[error("coupling violated at step {step}: core count {core} > D' + 1 = {bound}")]
    CouplingViolated { step: u64, core: u32, bound: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn check_probability(value: f64, lo: f64, hi: f64, range: &'static str) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::Probability { value, range })
    }
}
