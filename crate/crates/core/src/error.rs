use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("encoder and rangefinder streams do not overlap in time")]
    EmptyOverlap,
    #[error("{stream} timestamps are not strictly increasing at index {index}")]
    NonMonotoneInput { stream: &'static str, index: usize },
    #[error("counts-per-inch coefficient must be positive, got {0}")]
    NonPositiveCoefficient(f64),
    #[error("invalid sample at index {index}: {reason}")]
    InvalidSample { index: usize, reason: &'static str },
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: &'static str },
    #[error("{count} blocks at {spacing} in spacing exceed the {pipe_length} in pipe")]
    BlocksExceedPipe { count: usize, spacing: f64, pipe_length: f64 },
    #[error("sensor log is empty")]
    EmptyLog,
    #[error("no accepted rangefinder readings beyond the origin")]
    NoValidReadings,
    #[error("segment {start}..{end} has degenerate encoder displacement {displacement}")]
    DegenerateSegment { start: usize, end: usize, displacement: f64 },
    #[error("length mismatch: expected {expected}, got {actual}")]
    MismatchedLengths { expected: usize, actual: usize },
    #[error("information matrix is not positive definite at node {0}")]
    SingularSystem(usize),
    #[error("detection time for block {block_id} lies outside the trajectory")]
    TimestampOutOfRange { block_id: u32 },
    #[error("no reports to summarize")]
    EmptyInput,
}
