//! Learned search heuristics.
//!
//! A regressor scores each vertex as it enters the open list with an estimate
//! of its cost-to-go; the selector expands the smallest score. Training rolls
//! out searches that mix the learner's queue with the oracle's and labels
//! random open vertices with their true cost-to-go.

mod features;
mod ledger;
mod selector;
mod train;

pub(crate) use features::write_features;
pub use features::{extract_search_features, NO_OBSTACLE, SEARCH_FEATURES};
pub use ledger::{complexity_ledger, ComplexityReport, ComplexityRow};
pub use selector::{DualQueueSelector, EpsilonSelector, LearnedSelector, OracleSelector};
pub use train::{train_sail, SailAdapter, SailConfig, SailTrained};
