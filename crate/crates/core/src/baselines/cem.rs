//! Cross-entropy method over flat policy parameters.

use rand::seq::index::sample;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ipp::{ipp_env, IppEnv, IppPolicy, IppState, SensorModel};
use crate::learn::{par_map, Regressor, RegressorConfig, RegressorKind, Schema};
use crate::rng::{rng_for, Rng};
use crate::sail::LearnedSelector;
use crate::search::{run_search, TEST_BUDGET};
use crate::worldgen::ProblemInstance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CemConfig {
    pub iterations: usize,
    /// Parameter vectors sampled per iteration.
    pub batch: usize,
    /// Instances each sample is scored on.
    pub envs_per_param: usize,
    pub elite_frac: f64,
    pub init_std: f64,
    pub std_floor: f64,
    pub seed: u64,
}

impl Default for CemConfig {
    fn default() -> Self {
        CemConfig {
            iterations: 20,
            batch: 40,
            envs_per_param: 5,
            elite_frac: 0.2,
            init_std: 1.0,
            std_floor: 1e-6,
            seed: 0,
        }
    }
}

impl CemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.batch == 0 || self.envs_per_param == 0 {
            return Err(Error::config("iterations/batch/envs_per_param", "must all be at least 1"));
        }
        if !(self.elite_frac > 0.0 && self.elite_frac <= 1.0) {
            return Err(Error::config("elite_frac", "must lie in (0, 1]"));
        }
        if !(self.init_std >= 0.0) || !(self.std_floor >= 0.0) {
            return Err(Error::config("init_std/std_floor", "must be non-negative"));
        }
        Ok(())
    }

    pub fn elite_count(&self) -> usize {
        ((self.elite_frac * self.batch as f64).ceil() as usize).clamp(1, self.batch)
    }
}

/// Diagonal Gaussian over parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CemState {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub iteration: usize,
}

impl CemState {
    pub fn new(mean: Vec<f64>, std: f64) -> Self {
        let std = vec![std; mean.len()];
        CemState { mean, std, iteration: 0 }
    }

    pub fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        self.mean
            .iter()
            .zip(&self.std)
            .map(|(m, s)| {
                let z: f64 = StandardNormal.sample(rng);
                m + s * z
            })
            .collect()
    }

    /// Moves the Gaussian onto the elite set; deviations never drop below `floor`.
    pub fn refit(&mut self, elites: &[Vec<f64>], floor: f64) {
        if elites.is_empty() {
            return;
        }
        let n = elites.len() as f64;
        for j in 0..self.mean.len() {
            let m = elites.iter().map(|e| e[j]).sum::<f64>() / n;
            let var = elites.iter().map(|e| (e[j] - m).powi(2)).sum::<f64>() / n;
            self.mean[j] = m;
            self.std[j] = var.sqrt().max(floor);
        }
        self.iteration += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CemLog {
    pub iter: usize,
    pub elite_mean: f64,
    pub best: f64,
    pub discarded: usize,
}

impl CemLog {
    pub const CSV_HEADER: &'static str = "iter,elite_mean,best,discarded";

    pub fn csv_row(&self) -> String {
        format!("{},{:.6},{:.6},{}", self.iter, self.elite_mean, self.best, self.discarded)
    }
}

#[derive(Clone, Debug)]
pub struct CemResult {
    pub state: CemState,
    pub logs: Vec<CemLog>,
}

/// Maximizes `fitness(params, instance_indices)`. Each iteration scores
/// every sample on the same `envs_per_param` instances drawn from
/// `0..n_envs`; non-finite scores are dropped.
pub fn cem_optimize<F>(init: Vec<f64>, n_envs: usize, cfg: &CemConfig, fitness: F) -> Result<CemResult>
where
    F: Fn(&[f64], &[usize]) -> f64 + Sync + Send,
{
    cfg.validate()?;
    if n_envs == 0 {
        return Err(Error::config("dataset", "no instances to score on"));
    }
    let mut state = CemState::new(init, cfg.init_std);
    let mut logs = Vec::with_capacity(cfg.iterations);
    for i in 1..=cfg.iterations {
        let mut rng = rng_for(cfg.seed, &[i as u64]);
        let envs: Vec<usize> = sample(&mut rng, n_envs, cfg.envs_per_param.min(n_envs)).into_vec();
        let samples: Vec<Vec<f64>> = (0..cfg.batch).map(|_| state.sample(&mut rng)).collect();
        let scores = par_map(samples.len(), |b| fitness(&samples[b], &envs));
        let mut scored: Vec<(f64, usize)> = Vec::with_capacity(scores.len());
        let mut discarded = 0;
        for (b, s) in scores.into_iter().enumerate() {
            if s.is_finite() {
                scored.push((s, b));
            } else {
                discarded += 1;
                log::warn!("cem iteration {i}: sample {b} has non-finite fitness; discarded");
            }
        }
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        scored.truncate(cfg.elite_count());
        let elites: Vec<Vec<f64>> = scored.iter().map(|&(_, b)| samples[b].clone()).collect();
        state.refit(&elites, cfg.std_floor);
        let elite_mean = scored.iter().map(|s| s.0).sum::<f64>() / scored.len().max(1) as f64;
        logs.push(CemLog {
            iter: i,
            elite_mean,
            best: scored.first().map_or(f64::NAN, |s| s.0),
            discarded,
        });
    }
    Ok(CemResult { state, logs })
}

/// Search policy family: a 17-100-1 network scoring open vertices.
pub fn cem_search_template(seed: u64) -> Result<Regressor> {
    Regressor::new(
        Schema::Search,
        RegressorConfig {
            kind: RegressorKind::Mlp,
            hidden: vec![100],
            ..RegressorConfig::default()
        },
        seed,
    )
}

#[derive(Clone, Debug)]
pub struct CemSearchTrained {
    pub policy: Regressor,
    pub logs: Vec<CemLog>,
}

/// Fitness is the negated mean expansion count.
pub fn train_cem_search(instances: &[ProblemInstance], cfg: &CemConfig, budget: Option<usize>) -> Result<CemSearchTrained> {
    let budget = budget.unwrap_or(TEST_BUDGET);
    let template = cem_search_template(cfg.seed)?;
    let dim = template.parameters().map_or(0, |p| p.len());
    let r = cem_optimize(vec![0.0; dim], instances.len(), cfg, |theta, envs| {
        let mut model = template.clone();
        if model.set_parameters(theta).is_err() {
            return f64::NAN;
        }
        let mut total = 0usize;
        for &e in envs {
            match LearnedSelector::new(&model).and_then(|mut s| run_search(&instances[e], &mut s, budget)) {
                Ok(res) => total += res.expansions,
                Err(_) => return f64::NAN,
            }
        }
        -(total as f64) / envs.len() as f64
    })?;
    let mut policy = template;
    policy.set_parameters(&r.state.mean)?;
    Ok(CemSearchTrained { policy, logs: r.logs })
}

/// Scores a node by `theta . g`, where `g` holds the six gains, each divided
/// by its sum over unvisited nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearGainPolicy {
    pub theta: [f64; 6],
}

impl IppPolicy for LinearGainPolicy {
    fn name(&self) -> String {
        "cem-linear".into()
    }

    fn select(&mut self, env: &IppEnv<'_>, state: &IppState, feasible: &[usize], _rng: &mut Rng) -> Result<usize> {
        if feasible.is_empty() {
            return Err(Error::contract("no feasible node"));
        }
        let mut sums = [0.0; 6];
        for v in env.unvisited(state) {
            for (s, g) in sums.iter_mut().zip(env.gains(state, v)) {
                *s += g;
            }
        }
        let score = |v: usize| -> f64 {
            let g = env.gains(state, v);
            (0..6)
                .map(|k| if sums[k] > 0.0 { self.theta[k] * g[k] / sums[k] } else { 0.0 })
                .sum()
        };
        let best = crate::ipp::argmax(feasible.iter().map(|&v| score(v))).unwrap_or(0);
        Ok(feasible[best])
    }
}

#[derive(Clone, Debug)]
pub struct CemIppTrained {
    pub policy: LinearGainPolicy,
    pub logs: Vec<CemLog>,
}

/// Fitness is the mean final coverage of `horizon`-step roll-outs.
pub fn train_cem_ipp(
    instances: &[ProblemInstance],
    cfg: &CemConfig,
    horizon: usize,
    budget: Option<f64>,
    sensor: Option<SensorModel>,
) -> Result<CemIppTrained> {
    let envs: Vec<IppEnv<'_>> = instances
        .iter()
        .map(|inst| ipp_env(inst, sensor, horizon, budget))
        .collect::<Result<_>>()?;
    let r = cem_optimize(vec![0.0; 6], envs.len(), cfg, |theta, idx| {
        let mut p = LinearGainPolicy {
            theta: theta.try_into().expect("six parameters"),
        };
        let mut total = 0.0;
        for &e in idx {
            let mut rng = rng_for(0, &[e as u64]);
            match envs[e].rollout(&mut p, &mut rng) {
                Ok(steps) => total += steps.last().map_or(0.0, |s| s.coverage),
                Err(_) => return f64::NAN,
            }
        }
        total / idx.len() as f64
    })?;
    Ok(CemIppTrained {
        policy: LinearGainPolicy {
            theta: r.state.mean.as_slice().try_into().expect("six parameters"),
        },
        logs: r.logs,
    })
}
