//! Island-model steady-state neuroevolution.
//!
//! A [`Population`] holds a ring of capacity-bounded islands. Each step picks
//! an island, breeds one child by structural mutation or crossover, trains it
//! with backpropagation through time starting from the inherited weights and
//! inserts it back into the island it came from. Islands that stagnate are
//! periodically wiped and refilled with mutants of the global best.

mod config;
mod crossover;
mod evolve;
mod mutation;
mod population;

pub use config::{EvoConfig, MutationWeights};
pub use crossover::crossover;
pub use evolve::{evolve, evolve_series, EvolutionRecord, EvolutionResult, LOG_HEADER};
pub use mutation::MutationKind;
pub use population::{seed_genome, Island, Population};

use crate::rnn::RnnError;

#[derive(Debug, thiserror::Error)]
pub enum EvoError {
    #[error("invalid evolution config: {0}")]
    Config(String),
    #[error("no island with id {0}")]
    UnknownIsland(usize),
    #[error("genome {0} has no fitness")]
    Unevaluated(u64),
    #[error("parents {0} and {1} share no genes")]
    NoAlignedGenes(u64, u64),
    #[error(transparent)]
    Rnn(#[from] RnnError),
}

pub type Result<T, E = EvoError> = std::result::Result<T, E>;
