//! Hierarchy-aware embedding learning.
//!
//! Labels live in a tree ([`taxonomy`]). Training samples generalised
//! triplets from that tree ([`sampler`]) and combines a triplet loss with
//! tree-aware classification losses ([`losses`]) on a small feed-forward
//! embedder ([`model`]). Evaluation ([`metrics`], [`evaluate`]) measures how
//! well the embedding space reflects the tree, including on classes held out
//! of training ([`datasplit`]). [`synthdata`] produces hierarchical Gaussian
//! data to run all of this at desk scale, and [`experiment`] strings the
//! stages together.
//!
//! Runnable walkthroughs of each part live in the crate's `examples/`
//! directory.

pub mod dataset;
pub mod datasplit;
pub mod error;
pub mod evaluate;
pub mod experiment;
pub mod losses;
pub mod metrics;
pub mod model;
pub mod sampler;
pub mod seeding;
pub mod synthdata;
pub mod taxonomy;

pub use dataset::{Dataset, LabeledSample};
pub use datasplit::{SplitAssignment, Subset};
pub use error::{Error, Result};
pub use evaluate::MetricsReport;
pub use losses::{LossCombo, LossKind};
pub use model::{fit, TrainConfig, TrainedModel};
pub use taxonomy::{NodeId, Taxonomy, TreeSpec};
