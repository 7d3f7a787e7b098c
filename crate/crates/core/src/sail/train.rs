//! AggreVaTe specialised to search: roll out with a mixture of the oracle and
//! learner queues, label random open vertices with their true cost-to-go.

use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};
use serde::{Deserialize, Serialize};

use super::features::{write_features, SEARCH_FEATURES};
use super::selector::{DualQueueSelector, LearnedSelector, OracleSelector};
use crate::error::{Error, Result};
use crate::learn::{
    aggrevate, AggrevateConfig, DomainAdapter, Episode, IterationLog, LabelPlan, Mixing, Policy, Record, Regressor,
    RegressorConfig, RollIn, Schema,
};
use crate::oracles::{backward_dijkstra, oracle_action_value, CostToGoTable};
use crate::rng::{rng_for, Rng};
use crate::search::{run_search, run_search_with, SearchContext, SearchFrontier, SearchObserver, SearchOptions, Selector, TEST_BUDGET};
use crate::worldgen::ProblemInstance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SailConfig {
    /// `N`.
    pub iterations: usize,
    /// `m`, episodes per iteration.
    pub episodes: usize,
    /// `k`, labelled timesteps per episode.
    pub labels: usize,
    pub beta0: f64,
    pub mixing: Mixing,
    /// Expansion cap for training roll-outs and validation searches.
    pub budget: usize,
    pub validation_fraction: f64,
    pub regressor: RegressorConfig,
    pub seed: u64,
}

impl Default for SailConfig {
    fn default() -> Self {
        SailConfig {
            iterations: 10,
            episodes: 20,
            labels: 20,
            beta0: 0.7,
            mixing: Mixing::PerStep,
            budget: TEST_BUDGET,
            validation_fraction: 0.2,
            regressor: RegressorConfig::default(),
            seed: 0,
        }
    }
}

impl SailConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.episodes == 0 || self.labels == 0 {
            return Err(Error::config("iterations/episodes/labels", "must all be at least 1"));
        }
        if self.budget == 0 {
            return Err(Error::config("budget", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::config("validation_fraction", "must lie in [0, 1)"));
        }
        self.regressor.validate()
    }
}

/// Builds the cost-to-go table of a solvable instance, `None` otherwise.
fn solvable_table(inst: &ProblemInstance) -> Result<Option<CostToGoTable>> {
    let (start, goal) = inst
        .start_goal()
        .ok_or_else(|| Error::contract("expected a start/goal instance"))?;
    let table = backward_dijkstra(&inst.world, goal, None)?;
    Ok(table.value(start).map(|_| table))
}

/// Training roll-outs over held-in worlds, validation on the rest. Each
/// world's oracle table is computed once, up front.
pub struct SailAdapter<'a> {
    budget: usize,
    train: Vec<(&'a ProblemInstance, CostToGoTable)>,
    val: Vec<&'a ProblemInstance>,
    skipped: usize,
}

impl<'a> SailAdapter<'a> {
    pub fn new(instances: &'a [ProblemInstance], cfg: &SailConfig) -> Result<Self> {
        cfg.validate()?;
        let mut skipped = 0;
        let mut usable = Vec::with_capacity(instances.len());
        for (i, inst) in instances.iter().enumerate() {
            match solvable_table(inst)? {
                Some(table) => usable.push((inst, table)),
                None => {
                    skipped += 1;
                    log::warn!("instance {i} is unsolvable; skipped");
                }
            }
        }
        if usable.len() < 2 {
            return Err(Error::config("dataset", "need at least two solvable instances"));
        }
        usable.shuffle(&mut rng_for(cfg.seed, &[0x5a11]));
        let n_val = ((usable.len() as f64 * cfg.validation_fraction).round() as usize).clamp(1, usable.len() - 1);
        let train = usable.split_off(n_val);
        Ok(SailAdapter {
            budget: cfg.budget,
            val: usable.into_iter().map(|(inst, _)| inst).collect(),
            train,
            skipped,
        })
    }

    pub(crate) fn train_set(&self) -> &[(&'a ProblemInstance, CostToGoTable)] {
        &self.train
    }

    /// Unsolvable instances dropped at construction.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    pub fn validation_instances(&self) -> &[&'a ProblemInstance] {
        &self.val
    }
}

/// Labels uniformly chosen timesteps of a running search (reservoir sampling
/// over the unknown episode length).
struct Labeler<'t> {
    table: &'t CostToGoTable,
    plan: LabelPlan,
    budget: usize,
    rng: Rng,
    records: Vec<Record>,
}

impl Labeler<'_> {
    fn label(&mut self, t: usize, frontier: &SearchFrontier, ctx: &SearchContext<'_>) -> Record {
        let v = frontier.open_at(self.rng.random_range(0..frontier.open_len()));
        let mut x = [0.0; SEARCH_FEATURES];
        write_features(v, frontier, ctx, &mut x);
        Record {
            features: x.to_vec(),
            t,
            target: oracle_action_value(self.table, v),
            iteration: 0,
        }
    }
}

impl SearchObserver for Labeler<'_> {
    fn before_select(&mut self, t: usize, frontier: &SearchFrontier, ctx: &SearchContext<'_>) {
        match self.plan {
            LabelPlan::At(s) => {
                if t + 1 == s {
                    let r = self.label(t + 1, frontier, ctx);
                    self.records.push(r);
                }
            }
            LabelPlan::Uniform(k) => {
                let n = t + 1;
                if n <= k {
                    let r = self.label(n, frontier, ctx);
                    self.records.push(r);
                } else {
                    let j = self.rng.random_range(0..n);
                    if j < k {
                        self.records[j] = self.label(n, frontier, ctx);
                    }
                }
            }
        }
    }

    fn after_expand(&mut self, t: usize, _v: crate::grid::Vertex, frontier: &SearchFrontier, ctx: &SearchContext<'_>) {
        let LabelPlan::Uniform(k) = self.plan else { return };
        let ended = frontier.is_open(ctx.goal) || t + 1 >= self.budget || frontier.open_len() == 0;
        // Episodes shorter than k steps take the remaining labels from the final frontier.
        while ended && self.records.len() < k && frontier.open_len() > 0 {
            let r = self.label(t + 2, frontier, ctx);
            self.records.push(r);
        }
    }
}

impl DomainAdapter for SailAdapter<'_> {
    fn schema(&self) -> Schema {
        Schema::Search
    }

    fn horizon(&self) -> usize {
        self.budget
    }

    fn instances(&self) -> usize {
        self.train.len()
    }

    fn episode(&self, instance: usize, rollin: RollIn<'_>, plan: LabelPlan, rng: &mut Rng) -> Result<Episode> {
        let (inst, table) = &self.train[instance];
        let mut labeler = Labeler {
            table,
            plan,
            budget: self.budget,
            rng: Rng::seed_from_u64(rng.random()),
            records: Vec::new(),
        };
        let mut run = |sel: &mut dyn Selector| run_search_with(inst, sel, self.budget, SearchOptions::default(), &mut labeler);
        let (result, oracle_steps, steps) = match rollin {
            RollIn::Oracle => {
                let r = run(&mut OracleSelector::new(table))?;
                let n = r.expansions;
                (r, n, n)
            }
            RollIn::Learner(p) => {
                let model = p.model_at(1).ok_or_else(|| Error::contract("empty policy"))?;
                (run(&mut LearnedSelector::new(model)?)?, 0, 0)
            }
            RollIn::PerStep { learner, beta } => {
                let mut sel = DualQueueSelector::new(learner, table, beta, Rng::seed_from_u64(rng.random()))?;
                let r = run(&mut sel)?;
                (r, sel.oracle_picks(), sel.picks())
            }
        };
        if let LabelPlan::At(s) = plan {
            if labeler.records.is_empty() {
                return Err(Error::contract(format!(
                    "search ended after {} expansions, before step {s}",
                    result.expansions
                )));
            }
        }
        Ok(Episode {
            records: labeler.records,
            oracle_steps,
            steps,
        })
    }

    /// Negated mean expansions over the validation worlds.
    fn validate(&self, policy: Policy<'_>) -> Result<f64> {
        let model = policy.model_at(1).ok_or_else(|| Error::contract("empty policy"))?;
        let mut total = 0usize;
        for inst in &self.val {
            total += run_search(inst, &mut LearnedSelector::new(model)?, self.budget)?.expansions;
        }
        Ok(-(total as f64) / self.val.len() as f64)
    }
}

#[derive(Clone, Debug)]
pub struct SailTrained {
    pub policy: Regressor,
    /// 1-based iteration whose policy validated best.
    pub best_iteration: usize,
    pub logs: Vec<IterationLog>,
    /// Size of the aggregated dataset.
    pub records: usize,
    /// Unsolvable instances left out of training.
    pub skipped: usize,
}

/// Trains a learned search heuristic on start/goal instances.
pub fn train_sail(instances: &[ProblemInstance], cfg: &SailConfig) -> Result<SailTrained> {
    let adapter = SailAdapter::new(instances, cfg)?;
    let r = aggrevate(
        &adapter,
        &AggrevateConfig {
            iterations: cfg.iterations,
            episodes: cfg.episodes,
            labels: cfg.labels,
            beta0: cfg.beta0,
            mixing: cfg.mixing,
            regressor: cfg.regressor.clone(),
            seed: cfg.seed,
        },
    )?;
    Ok(SailTrained {
        policy: r.policy,
        best_iteration: r.best_iteration,
        records: r.dataset.len(),
        logs: r.logs,
        skipped: adapter.skipped(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridWorld, Vertex};
    use crate::learn::RegressorKind;
    use crate::worldgen::{sample_search_instance, Family, FamilyParams, WorldSpec};

    fn instances(family: Family, size: usize, n: u64, seed: u64) -> Vec<ProblemInstance> {
        let spec = WorldSpec::new(family, FamilyParams::with_size(size, size), seed);
        (0..n).map(|i| sample_search_instance(&spec, i).unwrap().0).collect()
    }

    fn small() -> SailConfig {
        SailConfig {
            iterations: 2,
            episodes: 4,
            labels: 5,
            regressor: RegressorConfig {
                kind: RegressorKind::TreeEnsemble,
                trees: 5,
                ..RegressorConfig::default()
            },
            ..SailConfig::default()
        }
    }

    #[test]
    fn dataset_holds_n_m_k_records() {
        let data = instances(Family::GapWall, 16, 6, 1);
        let r = train_sail(&data, &small()).unwrap();
        assert_eq!(r.records, 2 * 4 * 5);
        assert_eq!(r.logs.len(), 2);
        assert_eq!(r.logs[1].dataset_size, 40);
    }

    #[test]
    fn short_episodes_still_yield_k_labels() {
        // Open space: the oracle reaches the goal in a handful of expansions.
        let world = GridWorld::new(8, 8).unwrap();
        let inst = ProblemInstance::search(world, Vertex::new(0, 7), Vertex::new(3, 5)).unwrap();
        let data = vec![inst.clone(), inst];
        let cfg = SailConfig {
            labels: 30,
            ..small()
        };
        let adapter = SailAdapter::new(&data, &cfg).unwrap();
        let ep = adapter
            .episode(0, RollIn::Oracle, LabelPlan::Uniform(30), &mut rng_for(0, &[]))
            .unwrap();
        assert_eq!(ep.records.len(), 30);
        assert_eq!(ep.steps, 3);
        for r in &ep.records {
            assert_eq!(r.features.len(), SEARCH_FEATURES);
            assert!(r.target >= 0.0);
        }
    }

    #[test]
    fn labels_are_true_costs_to_go() {
        let data = instances(Family::Forest, 16, 3, 4);
        let adapter = SailAdapter::new(&data, &small()).unwrap();
        let (inst, table) = &adapter.train[0];
        let ep = adapter
            .episode(0, RollIn::Oracle, LabelPlan::Uniform(5), &mut rng_for(2, &[]))
            .unwrap();
        let w = inst.world.width() as f64 - 1.0;
        let h = inst.world.height() as f64 - 1.0;
        for r in ep.records {
            let v = Vertex::new((r.features[0] * w).round() as u32, (r.features[1] * h).round() as u32);
            assert_eq!(r.target, table.target(v));
        }
    }

    #[test]
    fn unsolvable_instances_are_skipped() {
        let mut data = instances(Family::Forest, 16, 4, 2);
        let walled = GridWorld::from_ascii(&["..#..", "..#..", "..#..", "..#..", "..#.."]).unwrap();
        data.push(ProblemInstance::search(walled, Vertex::new(0, 4), Vertex::new(4, 0)).unwrap());
        let r = train_sail(&data, &small()).unwrap();
        assert_eq!(r.skipped, 1);
    }

    #[test]
    fn learner_only_single_iteration_smoke() {
        let data = instances(Family::Forest, 16, 5, 3);
        let cfg = SailConfig {
            iterations: 1,
            beta0: 0.0,
            ..small()
        };
        let r = train_sail(&data, &cfg).unwrap();
        assert_eq!(r.logs.len(), 1);
        assert_eq!(r.logs[0].beta, 0.0);
        assert_eq!(r.logs[0].oracle_fraction, 0.0);
        assert!(r.logs[0].val_metric < 0.0);
    }

    #[test]
    fn seeded_training_is_reproducible() {
        let data = instances(Family::GapWall, 16, 5, 9);
        let a = train_sail(&data, &small()).unwrap();
        let b = train_sail(&data, &small()).unwrap();
        assert_eq!(a.logs, b.logs);
    }
}
