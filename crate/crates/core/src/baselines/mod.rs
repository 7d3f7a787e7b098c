//! Learning baselines sharing the imitation learners' feature schemas:
//! behavior cloning, Q-learning and the cross-entropy method.

mod bc;
mod cem;
mod ql;

pub use bc::{behavior_cloning, train_behavior_cloning};
pub use cem::{
    cem_optimize, cem_search_template, train_cem_ipp, train_cem_search, CemConfig, CemIppTrained, CemLog, CemResult,
    CemSearchTrained, CemState, LinearGainPolicy,
};
pub use ql::{train_qlearning, QlConfig, QlTrained};
