//! Problem corpus tooling: loading and validation, difficulty levels,
//! stratified splits, experience replay and statistics.

mod corpus;
mod experience;
mod level;
mod split;
mod stats;

pub use corpus::{load_corpus, load_problem, record_from_file, Category, CorpusError, LoadFailure, ProblemRecord};
pub use experience::build_experience;
pub use level::{difficulty_of, DifficultyLevel};
pub use split::{apportion, split, Split};
pub use stats::{corpus_stats, CorpusStats};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DatasetError {
    #[error("split ratios must be nonnegative and sum to 1, got {0:?}")]
    BadRatios([f64; 3]),
    #[error("replay of `{id}` failed: {message}")]
    Replay { id: String, message: String },
}
