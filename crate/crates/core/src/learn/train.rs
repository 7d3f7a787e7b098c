//! Forward training of non-stationary policies and AggreVaTe with dataset
//! aggregation.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::dataset::{ExperienceDataset, Record, Schema};
use super::regressor::{Regressor, RegressorConfig};
use super::MixtureSchedule;
use crate::error::{Error, Result};
use crate::rng::{derive, rng_for, Rng};

/// A learned policy: one model for all steps, or one per step.
#[derive(Clone, Copy, Debug)]
pub enum Policy<'a> {
    Stationary(&'a Regressor),
    /// Step `t` (1-based) uses model `t - 1`; later steps reuse the last.
    NonStationary(&'a [Regressor]),
}

impl Policy<'_> {
    /// Model for 1-based step `t`, if any.
    pub fn model_at(&self, t: usize) -> Option<&Regressor> {
        match self {
            Policy::Stationary(m) => Some(m),
            Policy::NonStationary(ms) => ms.get(t.saturating_sub(1)).or(ms.last()),
        }
    }
}

/// How the steps before a label are chosen.
#[derive(Clone, Copy, Debug)]
pub enum RollIn<'a> {
    Oracle,
    Learner(Policy<'a>),
    /// Independent coin per step: oracle with probability `beta`.
    PerStep { learner: &'a Regressor, beta: f64 },
}

/// Which timesteps of an episode receive labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LabelPlan {
    /// Label exactly at 1-based step `t`.
    At(usize),
    /// Label `k` distinct steps drawn uniformly from the episode.
    Uniform(usize),
}

/// Records produced by one episode plus roll-in bookkeeping.
#[derive(Clone, Debug, Default)]
pub struct Episode {
    pub records: Vec<Record>,
    pub oracle_steps: usize,
    pub steps: usize,
}

/// Domain hooks needed by the training loops.
pub trait DomainAdapter: Sync {
    fn schema(&self) -> Schema;
    /// Episode length `T`.
    fn horizon(&self) -> usize;
    /// Number of training instances to sample from.
    fn instances(&self) -> usize;
    /// Rolls in on `instance` and labels the steps named by `plan`.
    fn episode(&self, instance: usize, rollin: RollIn<'_>, plan: LabelPlan, rng: &mut Rng) -> Result<Episode>;
    /// Validation score of a policy; higher is better.
    fn validate(&self, policy: Policy<'_>) -> Result<f64>;
}

/// Whether the oracle/learner coin is flipped per episode or per step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mixing {
    Episodic,
    PerStep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iter: usize,
    pub beta: f64,
    pub dataset_size: usize,
    pub train_mse: f64,
    pub val_metric: f64,
    pub oracle_fraction: f64,
    pub skipped: usize,
}

impl IterationLog {
    pub const CSV_HEADER: &'static str = "iter,beta,dataset_size,train_mse,val_metric";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.6},{},{:.6},{:.6}",
            self.iter, self.beta, self.dataset_size, self.train_mse, self.val_metric
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggrevateConfig {
    pub iterations: usize,
    pub episodes: usize,
    /// Labels per episode.
    pub labels: usize,
    pub beta0: f64,
    pub mixing: Mixing,
    pub regressor: RegressorConfig,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct AggrevateResult {
    pub policy: Regressor,
    /// 1-based iteration that produced `policy`.
    pub best_iteration: usize,
    pub logs: Vec<IterationLog>,
    pub dataset: ExperienceDataset,
}

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is on.
/// Output order always follows the index.
#[cfg(feature = "parallel")]
pub(crate) fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

pub(crate) const FIT_STREAM: u64 = 0xf1f1;

/// AggreVaTe: mix oracle and learner roll-ins with probability
/// `beta0^i`, aggregate every labelled record, refit on the whole dataset,
/// and keep the policy that validates best.
pub fn aggrevate(env: &dyn DomainAdapter, cfg: &AggrevateConfig) -> Result<AggrevateResult> {
    if cfg.iterations == 0 || cfg.episodes == 0 || cfg.labels == 0 {
        return Err(Error::config("iterations/episodes/labels", "must all be at least 1"));
    }
    if env.instances() == 0 {
        return Err(Error::config("dataset", "no training instances"));
    }
    let schedule = MixtureSchedule::new(cfg.beta0)?;
    let schema = env.schema();
    let mut learner = Regressor::new(schema, cfg.regressor.clone(), derive(cfg.seed, &[0]))?;
    let mut data = ExperienceDataset::new(schema);
    let mut logs = Vec::with_capacity(cfg.iterations);
    let mut best: Option<(f64, usize, Regressor)> = None;
    for i in 1..=cfg.iterations {
        let beta = schedule.beta(i);
        let current = &learner;
        let results = par_map(cfg.episodes, |j| -> Result<Episode> {
            let mut rng = rng_for(cfg.seed, &[i as u64, j as u64]);
            let instance = rng.random_range(0..env.instances());
            let (rollin, oracle) = match cfg.mixing {
                Mixing::Episodic => {
                    if rng.random::<f64>() < beta {
                        (RollIn::Oracle, true)
                    } else {
                        (RollIn::Learner(Policy::Stationary(current)), false)
                    }
                }
                Mixing::PerStep => (
                    RollIn::PerStep {
                        learner: current,
                        beta,
                    },
                    false,
                ),
            };
            let mut ep = env.episode(instance, rollin, LabelPlan::Uniform(cfg.labels), &mut rng)?;
            if cfg.mixing == Mixing::Episodic {
                ep.oracle_steps = usize::from(oracle);
                ep.steps = 1;
            }
            Ok(ep)
        });
        let mut skipped = 0;
        let (mut oracle_steps, mut steps) = (0, 0);
        for (j, r) in results.into_iter().enumerate() {
            match r {
                Ok(ep) => {
                    oracle_steps += ep.oracle_steps;
                    steps += ep.steps;
                    data.aggregate(ep.records, i)?;
                }
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
        let val_metric = env.validate(Policy::Stationary(&next))?;
        log::info!("iteration {i}: beta {beta:.4} |D| {} mse {train_mse:.5} val {val_metric:.5}", data.len());
        logs.push(IterationLog {
            iter: i,
            beta,
            dataset_size: data.len(),
            train_mse,
            val_metric,
            oracle_fraction: if steps == 0 { 0.0 } else { oracle_steps as f64 / steps as f64 },
            skipped,
        });
        if best.as_ref().is_none_or(|b| val_metric > b.0) {
            best = Some((val_metric, i, next.clone()));
        }
        learner = next;
    }
    let (_, best_iteration, policy) = best.expect("at least one iteration");
    Ok(AggrevateResult {
        policy,
        best_iteration,
        logs,
        dataset: data,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForwardConfig {
    /// Episodes per timestep.
    pub episodes: usize,
    pub regressor: RegressorConfig,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct ForwardResult {
    /// One policy per timestep.
    pub policies: Vec<Regressor>,
    pub logs: Vec<IterationLog>,
    /// Records of every step, tagged with their step in `t`.
    pub dataset: ExperienceDataset,
}

const RESAMPLES: u64 = 10;

/// Forward training: policy `t` is fitted only on labels taken at step `t`
/// after rolling in with policies `1..t-1`.
pub fn forward_training(env: &dyn DomainAdapter, cfg: &ForwardConfig) -> Result<ForwardResult> {
    if cfg.episodes == 0 {
        return Err(Error::config("episodes", "must be at least 1"));
    }
    if env.instances() == 0 {
        return Err(Error::config("dataset", "no training instances"));
    }
    let schema = env.schema();
    let horizon = env.horizon();
    let mut policies: Vec<Regressor> = Vec::with_capacity(horizon);
    let mut logs = Vec::with_capacity(horizon);
    let mut all = ExperienceDataset::new(schema);
    for t in 1..=horizon {
        let prefix = &policies[..];
        let results = par_map(cfg.episodes, |j| -> Result<Episode> {
            let mut last = Err(Error::contract("no attempt made"));
            for attempt in 0..RESAMPLES {
                let mut rng = rng_for(cfg.seed, &[t as u64, j as u64, attempt]);
                let instance = rng.random_range(0..env.instances());
                last = env.episode(instance, RollIn::Learner(Policy::NonStationary(prefix)), LabelPlan::At(t), &mut rng);
                match &last {
                    Ok(_) => break,
                    Err(e) => log::warn!("step {t} episode {j} attempt {attempt} resampled: {e}"),
                }
            }
            last
        });
        let mut d_t = ExperienceDataset::new(schema);
        let mut skipped = 0;
        for r in results {
            match r {
                Ok(ep) => {
                    for mut rec in ep.records {
                        rec.t = t;
                        d_t.push(rec)?;
                    }
                }
                Err(_) => skipped += 1,
            }
        }
        let mut pi = Regressor::new(schema, cfg.regressor.clone(), derive(cfg.seed, &[t as u64]))?;
        let train_mse = if d_t.is_empty() {
            f64::NAN
        } else {
            pi.fit(&d_t, derive(cfg.seed, &[FIT_STREAM, t as u64]))?.train_mse
        };
        all.aggregate(d_t.records().to_vec(), t)?;
        logs.push(IterationLog {
            iter: t,
            beta: 0.0,
            dataset_size: d_t.len(),
            train_mse,
            val_metric: f64::NAN,
            oracle_fraction: 0.0,
            skipped,
        });
        policies.push(pi);
    }
    let val = env.validate(Policy::NonStationary(&policies))?;
    if let Some(last) = logs.last_mut() {
        last.val_metric = val;
    }
    Ok(ForwardResult {
        policies,
        logs,
        dataset: all,
    })
}
