use thiserror::Error;

/// Errors surfaced by constructors, builders and the serializer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input has dimension {got}, network expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid must contain at least one point")]
    EmptyGrid,

    #[error("epsilon must lie in (0, 1), got {0}")]
    EpsOutOfRange(f64),

    #[error("value {0} outside the domain [0, 1]")]
    DomainViolation(f64),

    #[error("interpolation degree {requested} exceeds the conditioning cap {cap}")]
    DegreeCap { requested: usize, cap: usize },

    #[error("{what}: l1 norm is {sum}, expected {expected}")]
    L1Violation {
        what: &'static str,
        sum: f64,
        expected: f64,
    },

    #[error("target `{0}` carries no derivative-bound profile")]
    Uncertified(String),

    #[error(
        "target `{target}`: certified error bound {bound} exceeds requested epsilon {eps}"
    )]
    ProfileInsufficient {
        target: String,
        bound: f64,
        eps: f64,
    },

    #[error("{what} left [0, 1]: value {value} at {point:?}")]
    RangeViolation {
        what: String,
        value: f64,
        point: Vec<f64>,
    },

    #[error("stage {index} of the cascade failed: {source}")]
    StageFailed {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("build for epsilon {eps} failed: {source}")]
    SweepEntry {
        eps: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(
        "measured sup error {measured} exceeds the theoretical bound {bound} (+1e-12 slack)"
    )]
    BoundViolation { measured: f64, bound: f64 },

    #[error("unsupported serialization version {0}, expected 1")]
    UnknownVersion(u32),

    #[error("node reference ({layer}, {index}) is invalid at layer {at}: {reason}")]
    DanglingRef {
        layer: usize,
        index: usize,
        at: usize,
        reason: &'static str,
    },

    #[error("malformed network text: {0}")]
    Parse(String),

    #[error("network invariant violated: {0}")]
    Invalid(String),

    #[error("term count {count} exceeds the cap {cap}")]
    TermCap { count: usize, cap: usize },

    #[error("knot count exceeded the cap {cap} without meeting the tolerance")]
    KnotCap { cap: usize },

    #[error("invalid parameter: {0}")]
    BadParam(String),
}

pub type Result<T> = std::result::Result<T, Error>;
