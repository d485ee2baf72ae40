//! Self-play: episode generation, replay memory, corpus generation and the
//! training loop with champion gating.

mod corpus;
mod episode;
mod replay;
mod training;

pub use corpus::{generate_corpus, CorpusError};
pub use episode::{fold_with, harvest_samples, EpisodeRecord, ReplaySample};
pub use replay::{NotReady, ReplayMemory, DEFAULT_CAPACITY};
pub use training::{
    fold_episode, fold_total, gate, run_training, training_iteration, GateResult, Metric, RunDir, TrainingConfig,
    TrainingError, TrainingSummary,
};
