use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("enumeration cap exceeded: {n} events, cap is {cap}")]
    CapExceeded { n: usize, cap: usize },

    #[error("invalid probability {value} for `{id}` (must lie in [0, 1])")]
    InvalidProbability { id: String, value: f64 },

    #[error("event set belongs to a different sample space")]
    ForeignEvent,

    #[error("unknown event `{0}`")]
    UnknownEvent(String),

    #[error("duplicate event `{0}`")]
    DuplicateEvent(String),

    #[error("leaf `{0}` occurs more than once; closed-form evaluation requires distinct leaves")]
    SharedLeaf(String),

    #[error("leaf `{leaf}` is shared between decision boxes `{first}` and `{second}`")]
    SharedLeafAcrossBoxes {
        leaf: String,
        first: String,
        second: String,
    },

    #[error("events are not pairwise disjoint: {0}")]
    NotDisjoint(String),

    #[error("conditioning event is not independent of the branch children")]
    NotIndependent,

    #[error("consequence path `{0}` appears more than once")]
    DuplicatePath(String),

    #[error("consequence path `{0}` has no decision boxes")]
    EmptyPath(String),

    #[error("negative failure rate {0}")]
    NegativeRate(f64),

    #[error("negative mission time {0}")]
    NegativeTime(f64),

    #[error("rate must be positive, got {0}")]
    NonPositiveRate(f64),

    #[error("load `{0}` has no probability")]
    MissingLoadProb(String),

    #[error("total customer count is zero")]
    ZeroCustomers,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown target `{0}`")]
    UnknownTarget(String),
}
