use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("cocycle identity fails at level {level} on triple ({g}, {h}, {k})")]
    CocycleIdentity { level: u32, g: usize, h: usize, k: usize },

    #[error("nonzero cocycle table at level {level} is a coboundary; split layers must use the zero table")]
    SplitLayerNotZero { level: u32 },

    #[error("chain layer {layer} is not centrally embedded")]
    NotCentralChain { layer: u32 },

    #[error("element {x} does not centralize {h} at the requested level")]
    NotInCentralizer { x: usize, h: usize },

    #[error("element does not normalize the cyclic subgroup generated by the inertia image")]
    NotNormalizing,

    #[error("character of a unit has no prime decomposition")]
    UnitInput,

    #[error("Frobenius evaluation at ramified prime {p}")]
    RamifiedEval { p: u64 },

    #[error("work cap exceeded: {0}")]
    CapExceeded(String),

    #[error("series failed to converge: {0}")]
    SeriesDivergence(String),

    #[error("group too large: {0}")]
    TooLarge(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unknown catalog name: {0}")]
    UnknownName(String),

    #[error("step list incompatible with group: {0}")]
    StepMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
