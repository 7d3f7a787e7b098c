//! Behavior cloning: one round of pure-oracle roll-ins, one fit.

use crate::error::Result;
use crate::learn::{aggrevate, AggrevateConfig, AggrevateResult, DomainAdapter, Mixing, RegressorConfig};
use crate::sail::{SailAdapter, SailConfig, SailTrained};
use crate::worldgen::ProblemInstance;

/// AggreVaTe with `N = 1` and `beta0 = 1`: every roll-in step is the oracle's.
pub fn behavior_cloning(
    env: &dyn DomainAdapter,
    episodes: usize,
    labels: usize,
    mixing: Mixing,
    regressor: RegressorConfig,
    seed: u64,
) -> Result<AggrevateResult> {
    aggrevate(
        env,
        &AggrevateConfig {
            iterations: 1,
            episodes,
            labels,
            beta0: 1.0,
            mixing,
            regressor,
            seed,
        },
    )
}

/// Supervised search heuristic. Uses `cfg.episodes` roll-ins; `iterations`
/// and `beta0` are ignored.
pub fn train_behavior_cloning(instances: &[ProblemInstance], cfg: &SailConfig) -> Result<SailTrained> {
    let adapter = SailAdapter::new(instances, cfg)?;
    let r = behavior_cloning(&adapter, cfg.episodes, cfg.labels, cfg.mixing, cfg.regressor.clone(), cfg.seed)?;
    Ok(SailTrained {
        policy: r.policy,
        best_iteration: r.best_iteration,
        records: r.dataset.len(),
        logs: r.logs,
        skipped: adapter.skipped(),
    })
}
