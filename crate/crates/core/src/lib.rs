//! Dataset construction, the n-gram baseline and the scorer for
//! cross-lingual pronoun prediction.

pub mod align;
pub mod error;
pub mod eval;
pub mod exec;
pub mod extract;
pub mod format;
pub mod lm;
pub mod model;

pub use error::{Error, Result};
pub use exec::Exec;
