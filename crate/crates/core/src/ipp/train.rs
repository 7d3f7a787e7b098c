//! Imitation of clairvoyant coverage oracles.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::episode::{GcbOraclePolicy, IppEnv, IppPolicy, IppState, LearnedIppPolicy, OneStepOraclePolicy};
use super::SensorModel;
use crate::error::{Error, Result};
use crate::learn::{
    aggrevate, forward_training, AggrevateConfig, DomainAdapter, Episode, ForwardConfig, IterationLog, LabelPlan,
    Mixing, Policy, Record, Regressor, RegressorConfig, RollIn, Schema,
};
use crate::oracles::{gcb_reward_to_go, onestep_reward};
use crate::rng::{rng_for, Rng};
use crate::worldgen::{ProblemInstance, Task};

/// Policy type crossed with the training loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IppVariant {
    #[serde(rename = "reward-ft", alias = "RewardFT")]
    RewardFT,
    #[serde(rename = "qval-ft", alias = "QvalFT")]
    QvalFT,
    #[serde(rename = "reward-agg", alias = "RewardAgg")]
    RewardAgg,
    #[serde(rename = "qval-agg", alias = "QvalAgg")]
    QvalAgg,
}

impl IppVariant {
    pub const ALL: [IppVariant; 4] = [IppVariant::RewardFT, IppVariant::QvalFT, IppVariant::RewardAgg, IppVariant::QvalAgg];

    pub fn name(self) -> &'static str {
        match self {
            IppVariant::RewardFT => "RewardFT",
            IppVariant::QvalFT => "QvalFT",
            IppVariant::RewardAgg => "RewardAgg",
            IppVariant::QvalAgg => "QvalAgg",
        }
    }

    /// Lower-case form used in config files and model tags.
    pub fn slug(self) -> &'static str {
        match self {
            IppVariant::RewardFT => "reward-ft",
            IppVariant::QvalFT => "qval-ft",
            IppVariant::RewardAgg => "reward-agg",
            IppVariant::QvalAgg => "qval-agg",
        }
    }

    pub fn is_qval(self) -> bool {
        matches!(self, IppVariant::QvalFT | IppVariant::QvalAgg)
    }

    pub fn is_forward(self) -> bool {
        matches!(self, IppVariant::RewardFT | IppVariant::QvalFT)
    }
}

impl fmt::Display for IppVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IppVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IppVariant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s) || v.slug() == s)
            .ok_or_else(|| Error::config("variant", format!("unknown variant `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IppTrainConfig {
    pub variant: IppVariant,
    /// Node selections per episode.
    pub horizon: usize,
    /// Travel budget; required by the Q-value variants.
    pub budget: Option<f64>,
    /// AggreVaTe iterations.
    pub iterations: usize,
    /// Episodes per iteration (AggreVaTe) or per step (forward training).
    pub episodes: usize,
    pub beta0: f64,
    pub validation_fraction: f64,
    pub sensor: Option<SensorModel>,
    pub regressor: RegressorConfig,
    pub seed: u64,
}

impl Default for IppTrainConfig {
    fn default() -> Self {
        IppTrainConfig {
            variant: IppVariant::RewardAgg,
            horizon: 15,
            budget: None,
            iterations: 10,
            episodes: 12,
            beta0: 0.7,
            validation_fraction: 0.2,
            sensor: None,
            regressor: RegressorConfig::tree_ensemble(),
            seed: 0,
        }
    }
}

impl IppTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.variant.is_qval() && self.budget.is_none() {
            return Err(Error::config("budget", format!("{} needs a travel budget", self.variant)));
        }
        if let Some(b) = self.budget {
            if !(b >= 0.0) {
                return Err(Error::config("budget", "must be non-negative"));
            }
        }
        if self.horizon == 0 {
            return Err(Error::config("horizon", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::config("validation_fraction", "must lie in [0, 1)"));
        }
        self.regressor.validate()
    }

    /// Reward variants optimize unconstrained coverage.
    pub fn effective_budget(&self) -> Option<f64> {
        if self.variant.is_qval() {
            self.budget
        } else {
            None
        }
    }
}

/// Training and validation environments for one variant.
pub struct IppAdapter<'a> {
    variant: IppVariant,
    horizon: usize,
    budget: Option<f64>,
    train: Vec<IppEnv<'a>>,
    val: Vec<IppEnv<'a>>,
}

pub(crate) fn ipp_env<'a>(
    inst: &'a ProblemInstance,
    sensor: Option<SensorModel>,
    horizon: usize,
    budget: Option<f64>,
) -> Result<IppEnv<'a>> {
    match &inst.task {
        Task::Ipp { graph, start_node } => {
            let sensor = sensor.unwrap_or_else(|| SensorModel::default_for(inst.world.width(), inst.world.height()));
            IppEnv::new(&inst.world, graph, *start_node, sensor, horizon, budget)
        }
        Task::Search { .. } => Err(Error::contract("expected a sensing-graph instance")),
    }
}

impl<'a> IppAdapter<'a> {
    pub fn new(instances: &'a [ProblemInstance], cfg: &IppTrainConfig) -> Result<Self> {
        cfg.validate()?;
        if instances.len() < 2 {
            return Err(Error::config("dataset", "need at least two instances to hold out validation"));
        }
        let mut order: Vec<usize> = (0..instances.len()).collect();
        order.shuffle(&mut rng_for(cfg.seed, &[0x5917]));
        let n_val = ((instances.len() as f64 * cfg.validation_fraction).round() as usize).clamp(1, instances.len() - 1);
        let budget = cfg.effective_budget();
        let build = |idx: &[usize]| -> Result<Vec<IppEnv<'a>>> {
            idx.iter()
                .map(|&i| ipp_env(&instances[i], cfg.sensor, cfg.horizon, budget))
                .collect()
        };
        let (val_idx, train_idx) = order.split_at(n_val);
        Ok(IppAdapter {
            variant: cfg.variant,
            horizon: cfg.horizon,
            budget,
            train: build(train_idx)?,
            val: build(val_idx)?,
        })
    }

    pub fn validation_envs(&self) -> &[IppEnv<'a>] {
        &self.val
    }

    fn label(&self, env: &IppEnv<'_>, state: &IppState, feasible: &[usize], t: usize, rng: &mut Rng) -> Vec<Record> {
        if self.variant.is_qval() {
            let a = feasible[rng.random_range(0..feasible.len())];
            let (value, _) = gcb_reward_to_go(env, state, a, self.budget, self.horizon + 1 - t);
            vec![Record {
                features: env.features(state, a).to_vec(),
                t,
                target: value,
                iteration: 0,
            }]
        } else {
            feasible
                .iter()
                .map(|&a| Record {
                    features: env.features(state, a).to_vec(),
                    t,
                    target: onestep_reward(env, state, a),
                    iteration: 0,
                })
                .collect()
        }
    }

    fn oracle_pick(&self, env: &IppEnv<'_>, state: &IppState, feasible: &[usize], rng: &mut Rng) -> Result<usize> {
        if self.variant.is_qval() {
            GcbOraclePolicy.select(env, state, feasible, rng)
        } else {
            OneStepOraclePolicy.select(env, state, feasible, rng)
        }
    }
}

fn learner_pick(model: &Regressor, env: &IppEnv<'_>, state: &IppState, feasible: &[usize], rng: &mut Rng) -> Result<usize> {
    LearnedIppPolicy::new(std::slice::from_ref(model))?.select(env, state, feasible, rng)
}

impl DomainAdapter for IppAdapter<'_> {
    fn schema(&self) -> Schema {
        Schema::Ipp
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn instances(&self) -> usize {
        self.train.len()
    }

    fn episode(&self, instance: usize, rollin: RollIn<'_>, plan: LabelPlan, rng: &mut Rng) -> Result<Episode> {
        let env = &self.train[instance];
        let mut label_steps: Vec<usize> = match plan {
            LabelPlan::At(t) => vec![t],
            LabelPlan::Uniform(k) => rand::seq::index::sample(rng, self.horizon, k.min(self.horizon))
                .into_iter()
                .map(|i| i + 1)
                .collect(),
        };
        label_steps.sort_unstable();
        let last_label = *label_steps.last().unwrap_or(&0);
        let mut state = env.initial_state();
        let mut ep = Episode::default();
        for s in 1..=last_label {
            let feasible = env.feasible(&state);
            if feasible.is_empty() {
                break;
            }
            if label_steps.binary_search(&s).is_ok() {
                ep.records.extend(self.label(env, &state, &feasible, s, rng));
                if s == last_label {
                    break;
                }
            }
            let node = match rollin {
                RollIn::Oracle => {
                    ep.oracle_steps += 1;
                    self.oracle_pick(env, &state, &feasible, rng)?
                }
                RollIn::Learner(p) => match p.model_at(s) {
                    Some(m) if !matches!(p, Policy::NonStationary(ms) if ms.len() < s) => {
                        learner_pick(m, env, &state, &feasible, rng)?
                    }
                    _ => return Err(Error::contract(format!("no learned policy for step {s}"))),
                },
                RollIn::PerStep { learner, beta } => {
                    if rng.random::<f64>() < beta {
                        ep.oracle_steps += 1;
                        self.oracle_pick(env, &state, &feasible, rng)?
                    } else {
                        learner_pick(learner, env, &state, &feasible, rng)?
                    }
                }
            };
            ep.steps += 1;
            env.step(&mut state, node)?;
        }
        Ok(ep)
    }

    fn validate(&self, policy: Policy<'_>) -> Result<f64> {
        let models = match policy {
            Policy::Stationary(m) => std::slice::from_ref(m),
            Policy::NonStationary(ms) => ms,
        };
        let mut total = 0.0;
        for (i, env) in self.val.iter().enumerate() {
            let mut p = LearnedIppPolicy::new(models)?;
            let steps = env.rollout(&mut p, &mut rng_for(0, &[i as u64]))?;
            total += steps.last().map_or(0.0, |s| s.coverage);
        }
        Ok(total / self.val.len() as f64)
    }
}

/// Outcome of training one variant.
#[derive(Clone, Debug)]
pub struct IppTrained {
    pub variant: IppVariant,
    /// A single policy for the aggregation variants, one per step otherwise.
    pub policies: Vec<Regressor>,
    pub logs: Vec<IterationLog>,
    /// Labelled records used for fitting.
    pub records: usize,
}

impl IppTrained {
    /// Mean final validation coverage reported by the last log line.
    pub fn final_validation(&self) -> f64 {
        self.logs.iter().rev().map(|l| l.val_metric).find(|v| v.is_finite()).unwrap_or(f64::NAN)
    }
}

/// Trains one of the four variants on sensing-graph instances.
pub fn train_ipp(instances: &[ProblemInstance], cfg: &IppTrainConfig) -> Result<IppTrained> {
    let adapter = IppAdapter::new(instances, cfg)?;
    if cfg.variant.is_forward() {
        let r = forward_training(
            &adapter,
            &ForwardConfig {
                episodes: cfg.episodes,
                regressor: cfg.regressor.clone(),
                seed: cfg.seed,
            },
        )?;
        Ok(IppTrained {
            variant: cfg.variant,
            records: r.dataset.len(),
            policies: r.policies,
            logs: r.logs,
        })
    } else {
        let r = aggrevate(
            &adapter,
            &AggrevateConfig {
                iterations: cfg.iterations,
                episodes: cfg.episodes,
                labels: 1,
                beta0: cfg.beta0,
                mixing: Mixing::Episodic,
                regressor: cfg.regressor.clone(),
                seed: cfg.seed,
            },
        )?;
        Ok(IppTrained {
            variant: cfg.variant,
            records: r.dataset.len(),
            policies: vec![r.policy],
            logs: r.logs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worldgen::{sample_ipp_instance, Family, FamilyParams, WorldSpec};

    fn instances(n: u64) -> Vec<ProblemInstance> {
        let spec = WorldSpec {
            family: Family::ParallelLines,
            params: FamilyParams::with_size(24, 24),
            seed: 4,
        };
        (0..n).map(|i| sample_ipp_instance(&spec, i, 30).unwrap().0).collect()
    }

    fn small(variant: IppVariant) -> IppTrainConfig {
        IppTrainConfig {
            variant,
            horizon: 4,
            budget: Some(40.0),
            iterations: 2,
            episodes: 3,
            regressor: RegressorConfig {
                trees: 5,
                ..RegressorConfig::tree_ensemble()
            },
            ..IppTrainConfig::default()
        }
    }

    #[test]
    fn qval_without_budget_is_config_error() {
        let insts = instances(4);
        let cfg = IppTrainConfig {
            budget: None,
            ..small(IppVariant::QvalAgg)
        };
        assert!(matches!(train_ipp(&insts, &cfg), Err(Error::Config { .. })));
        let ok = IppTrainConfig {
            budget: None,
            ..small(IppVariant::RewardAgg)
        };
        assert!(train_ipp(&insts, &ok).is_ok());
    }

    #[test]
    fn every_variant_trains() {
        let insts = instances(6);
        for v in IppVariant::ALL {
            let r = train_ipp(&insts, &small(v)).unwrap();
            let expected = if v.is_forward() { 4 } else { 1 };
            assert_eq!(r.policies.len(), expected, "{v}");
            assert!(r.final_validation() > 0.0, "{v}");
        }
    }

    #[test]
    fn qval_learner_rollouts_stay_within_budget() {
        let insts = instances(6);
        let cfg = small(IppVariant::QvalAgg);
        let r = train_ipp(&insts, &cfg).unwrap();
        for (i, inst) in insts.iter().enumerate() {
            let env = ipp_env(inst, None, 10, cfg.budget).unwrap();
            let mut p = LearnedIppPolicy::new(&r.policies).unwrap();
            let steps = env.rollout(&mut p, &mut rng_for(1, &[i as u64])).unwrap();
            assert!(steps.last().unwrap().cost <= 40.0 + 1e-9);
        }
    }

    #[test]
    fn variant_names_parse() {
        for v in IppVariant::ALL {
            assert_eq!(v.name().parse::<IppVariant>().unwrap(), v);
            assert_eq!(v.slug().parse::<IppVariant>().unwrap(), v);
            let json = serde_json::to_string(&v).unwrap();
            assert_eq!(json, format!("\"{}\"", v.slug()));
        }
        assert!("bogus".parse::<IppVariant>().is_err());
    }
}
