use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("mesh would need about {estimated} cells, budget is {budget}")]
    MeshBudget { estimated: usize, budget: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("patch around {x0:?} with radius {delta} is empty")]
    EmptyPatch { x0: [f64; 2], delta: f64 },

    #[error("point {0:?} is not on the domain boundary")]
    NotOnBoundary([f64; 2]),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid BV function: {0}")]
    InvalidBv(String),

    #[error("empty sequence")]
    EmptySequence,

    #[error("recession limit not detected at xi = {xi:?}: tail differences {tail:?}")]
    RecessionNotDetected { xi: Vec<f64>, tail: Vec<f64> },

    #[error("unknown integrand tag `{0}`")]
    UnknownIntegrand(String),

    #[error("invalid integrand parameters: {0}")]
    InvalidParams(String),

    #[error("objective returned a non-finite value {value} (field snapshot: {snapshot:?})")]
    NonFinite { value: f64, snapshot: Vec<f64> },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),

    #[error("witness not transferable: rescaled energy gap {achieved} did not reach {required}")]
    WitnessNotTransferable { achieved: f64, required: f64 },

    #[error("prefix too short: index n = {n} needs a member with coupling <= {required}, best achieved {achieved}")]
    PrefixTooShort { n: usize, required: f64, achieved: f64 },

    #[error("components do not sum to the sequence member (max deviation {0})")]
    ComponentsMismatch(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
