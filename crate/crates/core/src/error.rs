use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("support explosion: expansion needs {needed} atoms, cap is {cap}")]
    SupportExplosion { needed: u128, cap: usize },

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("item index {index} out of range ({n_items} items)")]
    IndexOutOfRange { index: usize, n_items: usize },

    #[error("empty item subset")]
    EmptySubset,

    #[error("scale factor must be strictly positive")]
    NonPositiveScale,

    #[error("pivot limit {cap} exceeded after {pivots} pivots in phase {phase}")]
    IterationLimit { pivots: u64, cap: u64, phase: u8 },

    #[error("support too large for the optimal-revenue program: {atoms} atoms, cap {cap}")]
    SupportTooLarge { atoms: usize, cap: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("item {item} has zero optimal single-item revenue")]
    ZeroItemRevenue { item: usize },

    #[error("too many similarity classes: {classes}, cap {cap}")]
    TooManyClasses { classes: usize, cap: usize },

    #[error("independence violated: {0}")]
    IndependenceViolated(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("subdomain has probability zero")]
    ZeroProbabilitySubdomain,

    #[error("wrong spec kind: expected {expected}, got {got}")]
    WrongKind {
        expected: &'static str,
        got: &'static str,
    },

    #[error("two-point family must share a single sale probability")]
    NotCommonP,

    #[error("bad generator parameters: {0}")]
    BadParams(String),

    #[error("invalid menu: {0}")]
    InvalidMenu(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
