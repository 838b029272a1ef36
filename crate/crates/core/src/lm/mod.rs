//! The n-gram language model baseline.

pub mod baseline;
pub mod candidates;
pub mod ngram;
pub mod search;

pub use baseline::{
    default_penalty_grid, fill_placeholders, fill_placeholders_with, lm_training_corpus,
    parse_penalty_grid, penalty_grid, predict_all, tune_none_penalty, GridPoint, Prediction,
    TuneResult,
};
pub use candidates::{build_candidate_set, CandidateSet, Filler, DEFAULT_OTHER_FILLERS};
pub use ngram::{train_lm, NGramModel, Smoothing, TrainOptions, WordId};
pub use search::SearchMode;
