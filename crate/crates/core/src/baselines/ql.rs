//! Episodic Q-learning for search with an aggregated replay dataset.
//!
//! Each expansion costs 1. A sampled transition expanding `v` is labelled
//! 0 when it puts the goal in the open list and otherwise
//! `1 + min` over the frozen keys of the open list after the expansion.

use rand::{Rng as _, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Vertex;
use crate::learn::{
    par_map, DomainAdapter, ExperienceDataset, IterationLog, Policy, Record, Regressor, RegressorConfig, Schema,
    FIT_STREAM,
};
use crate::rng::{derive, rng_for, Rng};
use crate::sail::{write_features, EpsilonSelector, SailAdapter, SailConfig, SEARCH_FEATURES};
use crate::search::{run_search, Expansion, SearchContext, SearchFrontier, Selector, TEST_BUDGET};
use crate::worldgen::ProblemInstance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QlConfig {
    pub iterations: usize,
    pub episodes: usize,
    /// Transitions kept per episode.
    pub labels: usize,
    pub epsilon0: f64,
    /// `epsilon_i = epsilon0 * epsilon_decay^(i-1)`.
    pub epsilon_decay: f64,
    pub budget: usize,
    pub validation_fraction: f64,
    pub regressor: RegressorConfig,
    pub seed: u64,
}

impl Default for QlConfig {
    fn default() -> Self {
        QlConfig {
            iterations: 10,
            episodes: 20,
            labels: 100,
            epsilon0: 0.9,
            epsilon_decay: 0.85,
            budget: TEST_BUDGET,
            validation_fraction: 0.2,
            regressor: RegressorConfig::default(),
            seed: 0,
        }
    }
}

impl QlConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon0) {
            return Err(Error::config("epsilon0", "must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.epsilon_decay) {
            return Err(Error::config("epsilon_decay", "must lie in [0, 1]"));
        }
        self.as_sail().validate()
    }

    pub fn epsilon(&self, iteration: usize) -> f64 {
        self.epsilon0 * self.epsilon_decay.powi(iteration.saturating_sub(1) as i32)
    }

    fn as_sail(&self) -> SailConfig {
        SailConfig {
            iterations: self.iterations,
            episodes: self.episodes,
            labels: self.labels,
            budget: self.budget,
            validation_fraction: self.validation_fraction,
            regressor: self.regressor.clone(),
            seed: self.seed,
            ..SailConfig::default()
        }
    }
}

/// Epsilon-greedy selector that records reservoir-sampled TD transitions.
struct TdRecorder<'m> {
    inner: EpsilonSelector<'m>,
    k: usize,
    picks: usize,
    rng: Rng,
    pending: Option<(usize, [f64; SEARCH_FEATURES])>,
    records: Vec<Record>,
}

impl<'m> TdRecorder<'m> {
    fn new(model: &'m Regressor, epsilon: f64, k: usize, rng: &mut Rng) -> Result<Self> {
        Ok(TdRecorder {
            inner: EpsilonSelector::new(model, epsilon, Rng::seed_from_u64(rng.random()))?,
            k,
            picks: 0,
            rng: Rng::seed_from_u64(rng.random()),
            pending: None,
            records: Vec::new(),
        })
    }
}

impl Selector for TdRecorder<'_> {
    fn name(&self) -> String {
        self.inner.name()
    }

    fn reset(&mut self, ctx: &SearchContext<'_>) {
        self.inner.reset(ctx);
    }

    fn on_insert(&mut self, v: Vertex, frontier: &SearchFrontier, ctx: &SearchContext<'_>) {
        self.inner.on_insert(v, frontier, ctx);
    }

    fn on_expand(&mut self, v: Vertex, exp: &Expansion, frontier: &SearchFrontier, ctx: &SearchContext<'_>) {
        self.inner.on_expand(v, exp, frontier, ctx);
        let Some((slot, x)) = self.pending.take() else { return };
        let target = if frontier.is_open(ctx.goal) {
            0.0
        } else {
            1.0 + self.inner.learner_mut().min_key(frontier).unwrap_or(0.0)
        };
        let rec = Record {
            features: x.to_vec(),
            t: self.picks,
            target,
            iteration: 0,
        };
        if slot == self.records.len() {
            self.records.push(rec);
        } else {
            self.records[slot] = rec;
        }
    }

    fn select(&mut self, frontier: &SearchFrontier, ctx: &SearchContext<'_>) -> Option<Vertex> {
        let v = self.inner.select(frontier, ctx)?;
        self.picks += 1;
        let slot = if self.picks <= self.k {
            Some(self.picks - 1)
        } else {
            Some(self.rng.random_range(0..self.picks)).filter(|&j| j < self.k)
        };
        if let Some(slot) = slot {
            let mut x = [0.0; SEARCH_FEATURES];
            write_features(v, frontier, ctx, &mut x);
            self.pending = Some((slot, x));
        }
        Some(v)
    }
}

#[derive(Clone, Debug)]
pub struct QlTrained {
    pub policy: Regressor,
    pub best_iteration: usize,
    /// `beta` holds the iteration's epsilon.
    pub logs: Vec<IterationLog>,
    pub records: usize,
    pub skipped: usize,
}

fn ql_episode(inst: &ProblemInstance, model: &Regressor, epsilon: f64, cfg: &QlConfig, rng: &mut Rng) -> Result<Vec<Record>> {
    let mut rec = TdRecorder::new(model, epsilon, cfg.labels, rng)?;
    run_search(inst, &mut rec, cfg.budget)?;
    Ok(rec.records)
}

pub fn train_qlearning(instances: &[ProblemInstance], cfg: &QlConfig) -> Result<QlTrained> {
    cfg.validate()?;
    let adapter = SailAdapter::new(instances, &cfg.as_sail())?;
    let train = adapter.train_set();
    let schema = Schema::Search;
    let mut learner = Regressor::new(schema, cfg.regressor.clone(), derive(cfg.seed, &[0]))?;
    let mut data = ExperienceDataset::new(schema);
    let mut logs = Vec::with_capacity(cfg.iterations);
    let mut best: Option<(f64, usize, Regressor)> = None;
    for i in 1..=cfg.iterations {
        let eps = cfg.epsilon(i);
        let current = &learner;
        let results = par_map(cfg.episodes, |j| {
            let mut rng = rng_for(cfg.seed, &[i as u64, j as u64]);
            let (inst, _) = &train[rng.random_range(0..train.len())];
            ql_episode(inst, current, eps, cfg, &mut rng)
        });
        let mut skipped = 0;
        for (j, r) in results.into_iter().enumerate() {
            match r {
                Ok(records) => data.aggregate(records, i)?,
                Err(e) => {
                    skipped += 1;
                    log::warn!("iteration {i} episode {j} skipped: {e}");
                }
            }
        }
        let mut next = Regressor::new(schema, cfg.regressor.clone(), derive(cfg.seed, &[i as u64]))?;
        let train_mse = if data.is_empty() {
            f64::NAN
        } else {
            next.fit(&data, derive(cfg.seed, &[FIT_STREAM, i as u64]))?.train_mse
        };
        let val_metric = adapter.validate(Policy::Stationary(&next))?;
        log::info!("q-learning iteration {i}: eps {eps:.4} |D| {} val {val_metric:.3}", data.len());
        logs.push(IterationLog {
            iter: i,
            beta: eps,
            dataset_size: data.len(),
            train_mse,
            val_metric,
            oracle_fraction: 0.0,
            skipped,
        });
        if best.as_ref().is_none_or(|b| val_metric > b.0) {
            best = Some((val_metric, i, next.clone()));
        }
        learner = next;
    }
    let (_, best_iteration, policy) = best.ok_or_else(|| Error::config("iterations", "must be at least 1"))?;
    Ok(QlTrained {
        policy,
        best_iteration,
        logs,
        records: data.len(),
        skipped: adapter.skipped(),
    })
}
