//! Error type shared by all modules.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when constructing or driving the lab.
#[derive(Debug, Error)]
pub enum Error {
    /// A probability vector failed validation (positivity, ordering, sum).
    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),
    /// Hub-family construction produced a non-ranked vector.
    #[error("hub family is not ranked: theta_I * s = {hub} < tail = {tail}")]
    NotRanked { hub: f64, tail: f64 },
    /// Hub family requested with no tail atoms (n == I).
    #[error("degenerate tail: n = {n} leaves no room below {hubs} hubs")]
    DegenerateTail { n: usize, hubs: usize },
    /// A theta vector failed validation.
    #[error("invalid theta vector: {0}")]
    InvalidTheta(String),
    /// theta_0 vanished where the construction divides by it.
    #[error("degenerate theta: theta_0 must be positive")]
    DegenerateTheta,
    /// A parent code has the wrong length or out-of-range entries.
    #[error("malformed parent code: {0}")]
    MalformedCode(String),
    /// Exhaustive enumeration requested beyond the hard-coded size guard.
    #[error("enumeration too large: n = {n} exceeds limit {limit}")]
    TooLarge { n: usize, limit: usize },
    /// A weight vector does not cover the labels of the structure.
    #[error("weight mismatch: {0}")]
    WeightMismatch(String),
    /// An ordered decomposition does not belong to the mapping it is used with.
    #[error("inconsistent basin order: {0}")]
    InconsistentOrder(String),
    /// A time argument fell outside the function's domain.
    #[error("argument {value} outside [0, {total}]")]
    OutOfRange { value: f64, total: f64 },
    /// Two distinct excursion heights collided and tie-breaking was disabled.
    #[error("excursion height tie at {0}")]
    HeightTie(f64),
    /// The pivot time does not visit the last spine vertex.
    #[error("spine mismatch: {0}")]
    SpineMismatch(String),
    /// Vervaat transform applied to a path whose endpoints differ.
    #[error("not a bridge: |X(0) - X(1)| = {0}")]
    NonBridge(f64),
    /// Rescaling by a non-positive factor.
    #[error("non-positive scale {0}")]
    NonpositiveScale(f64),
    /// A span-reduction target is not a vertex of the tree.
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    /// A statistic was asked of an empty sample.
    #[error("empty sample")]
    EmptySample,
    /// Two finite pmfs with different support index sets.
    #[error("support mismatch: {0} vs {1} atoms")]
    SupportMismatch(usize, usize),
    /// Experiment configuration rejected.
    #[error("config error: {0}")]
    Config(String),
    /// I/O failure while reading configs or writing reports.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
