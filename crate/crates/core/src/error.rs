use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty taxonomy document")]
    EmptyDocument,
    #[error("duplicate node name `{0}`")]
    DuplicateName(String),
    #[error("cycle in parent links through `{0}`")]
    Cycle(String),
    #[error("malformed taxonomy: {0}")]
    MalformedTaxonomy(String),
    #[error("node id {0} is out of range")]
    InvalidNode(usize),
    #[error("node {ancestor} is not an ancestor of node {descendant}")]
    NotAncestor { descendant: usize, ancestor: usize },
    #[error("level {0} is not a target level of this taxonomy")]
    NotATargetLevel(usize),
    #[error("unknown leaf label `{0}`")]
    UnknownLeaf(String),
    #[error("label `{0}` is not a leaf")]
    NotALeaf(String),

    #[error("invalid split request: {0}")]
    InvalidSplit(String),
    #[error("no leaf has enough samples to be seen during training")]
    NoEligibleLeaves,
    #[error("leaf with {0} samples cannot fill train, valid and test")]
    TooFewSamples(usize),
    #[error("no seen leaves left after pruning")]
    NoSeenLeaves,

    #[error("taxonomy needs at least two leaves to form triplets")]
    TooFewLeaves,
    #[error("node `{node}` has {available} training samples, need {required}")]
    InsufficientNodeSamples {
        node: String,
        available: usize,
        required: usize,
    },

    #[error("zero-length vector in cosine distance")]
    ZeroVector,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("class index {index} out of range for {classes} classes")]
    IndexOutOfRange { index: usize, classes: usize },
    #[error("invalid loss configuration: {0}")]
    InvalidLossConfig(String),
    #[error("missing loss component {0}")]
    MissingComponent(String),
    #[error("class `{0}` has zero count")]
    ZeroCount(String),
    #[error("non-finite loss at epoch {epoch}, step {step}: {detail}")]
    NonFiniteLoss { epoch: usize, step: usize, detail: String },

    #[error("metric undefined: {0}")]
    Metric(String),

    #[error("invalid synthetic data config: {0}")]
    InvalidSynthConfig(String),
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
