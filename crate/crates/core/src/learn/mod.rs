//! Domain-agnostic imitation learning: regressors, experience aggregation,
//! mixture schedules and the two training loops.

mod dataset;
mod forest;
mod net;
mod regressor;
mod train;

pub use dataset::{ExperienceDataset, FeatureVector, Record, Schema};
pub use regressor::{FitReport, Regressor, RegressorConfig, RegressorKind};
pub(crate) use train::{par_map, FIT_STREAM};
pub use train::{
    aggrevate, forward_training, AggrevateConfig, AggrevateResult, DomainAdapter, Episode,
    ForwardConfig, ForwardResult, IterationLog, LabelPlan, Mixing, Policy, RollIn,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability of following the oracle at iteration `i`: `beta0^i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureSchedule {
    beta0: f64,
}

impl MixtureSchedule {
    pub fn new(beta0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta0) {
            return Err(Error::config("beta0", format!("{beta0} is outside [0, 1]")));
        }
        Ok(MixtureSchedule { beta0 })
    }

    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    /// Mixing probability for iteration `i >= 1`.
    pub fn beta(&self, i: usize) -> f64 {
        self.beta0.powi(i as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(MixtureSchedule::new(1.2).is_err());
        assert!(MixtureSchedule::new(-0.1).is_err());
        assert_eq!(MixtureSchedule::new(1.0).unwrap().beta(5), 1.0);
    }

    proptest! {
        #[test]
        fn strictly_decreasing(beta0 in 0.01f64..0.99, i in 1usize..40) {
            let s = MixtureSchedule::new(beta0).unwrap();
            prop_assert!(s.beta(i + 1) < s.beta(i));
            prop_assert!(s.beta(i) > 0.0 && s.beta(i) <= 1.0);
        }
    }
}
