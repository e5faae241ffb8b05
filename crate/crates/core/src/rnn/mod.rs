//! Graph-encoded recurrent networks: genome representation, forward pass,
//! backpropagation through time with Adam, and the fixed two-layer builders.
//!
//! A [`Genome`] is a set of nodes placed at depths in `[0, 1]`. Feed-forward
//! edges always point to a strictly deeper node, so evaluating nodes in depth
//! order within a timestep is well defined. Recurrent edges carry a value from
//! `time_skip` steps in the past and may point anywhere except into an input.

mod cell;
mod genome;
mod layered;
mod network;
mod serial;
mod train;

pub use genome::{
    CellKind, EdgeGene, Genome, Lineage, NodeGene, NodeKind, RecurrentEdgeGene, MAX_TIME_SKIP,
};
pub use layered::{build_layered, xavier_bound};
pub use network::{forward_pass, loss_and_gradient, Network};
pub use serial::{GENOME_FORMAT, GENOME_FORMAT_VERSION};
pub use train::{bptt_train, evaluate, evaluate_validation, gradient_rescale, Adam, TrainConfig};

#[derive(Debug, thiserror::Error)]
pub enum RnnError {
    #[error("invalid genome: {0}")]
    Invalid(String),
    #[error("non-finite value at node {node}, timestep {t}")]
    NonFinite { node: u64, t: usize },
    #[error("loss became NaN or infinite at epoch {epoch}")]
    NanLoss { epoch: usize },
    #[error("series is empty")]
    EmptySeries,
    #[error("series needs at least {needed} rows, has {got}")]
    TooShort { needed: usize, got: usize },
    #[error("input width {found} does not match the genome's {expected} inputs")]
    WidthMismatch { expected: usize, found: usize },
    #[error("unsupported cell kind `{0}`")]
    UnsupportedCell(String),
    #[error("invalid train config: {0}")]
    Config(String),
    #[error("genome file: {0}")]
    Format(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = RnnError> = std::result::Result<T, E>;
