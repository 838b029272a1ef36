//! Domain types shared by every stage of the pipeline. All of them are
//! plain immutable data once built and can be shared across threads.

mod alignment;
mod confusion;
mod instance;
mod subtask;
mod token;

pub use alignment::{AlignmentSet, Link};
pub use confusion::ConfusionMatrix;
pub use instance::{validate_instance, TargetItem, TaskInstance, Violation};
pub use subtask::{Direction, Language, SubtaskSpec, OTHER};
pub use token::{TaggedToken, Tagset, TagsetMode};
