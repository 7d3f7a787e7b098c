//! Rollout state, feature extraction and node-selection policies.

use super::belief::{BeliefParams, OccupancyBelief};
use super::gain::{info_gains, GainKind};
use super::raycast::{Measurement, RayFan};
use super::{wrap_angle, SensingGraph, SensorModel};
use crate::error::{Error, Result};
use crate::grid::GridWorld;
use crate::learn::{Regressor, Schema};
use crate::oracles;
use crate::rng::Rng;

/// Feature count of an IPP action: six gains plus seven motion terms.
pub const IPP_FEATURES: usize = 13;

/// Set of occupied world cells seen so far.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageState {
    covered: Vec<bool>,
    count: usize,
}

impl CoverageState {
    pub fn new(cells: usize) -> Self {
        CoverageState {
            covered: vec![false; cells],
            count: 0,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_covered(&self, index: usize) -> bool {
        self.covered[index]
    }

    /// Number of cells in `hits` not yet covered.
    pub fn marginal(&self, hits: &[u32]) -> usize {
        hits.iter().filter(|&&i| !self.covered[i as usize]).count()
    }

    /// Marks `hits` covered and returns how many were new.
    pub fn add(&mut self, hits: &[u32]) -> usize {
        let mut new = 0;
        for &i in hits {
            let c = &mut self.covered[i as usize];
            if !*c {
                *c = true;
                new += 1;
            }
        }
        self.count += new;
        new
    }
}

/// `|covered| / |occupied|`.
pub fn coverage_utility(state: &CoverageState, world: &GridWorld) -> Result<f64> {
    let occupied = world.occupied_count();
    if occupied == 0 {
        return Err(Error::UndefinedUtility(
            "coverage of a world without occupied cells".into(),
        ));
    }
    Ok(state.count as f64 / occupied as f64)
}

/// One IPP problem: hidden world, sensing graph, sensor and constraints.
/// Ray fans and true hit sets are precomputed per node.
#[derive(Clone, Debug)]
pub struct IppEnv<'a> {
    pub world: &'a GridWorld,
    pub graph: &'a SensingGraph,
    pub sensor: SensorModel,
    pub belief_params: BeliefParams,
    pub start: usize,
    /// Number of node selections after the start node.
    pub horizon: usize,
    pub budget: Option<f64>,
    fans: Vec<RayFan>,
    measurements: Vec<Measurement>,
    hits: Vec<Vec<u32>>,
    occupied: usize,
}

#[derive(Clone, Debug)]
pub struct IppState {
    pub belief: OccupancyBelief,
    pub coverage: CoverageState,
    pub visited: Vec<usize>,
    visited_flag: Vec<bool>,
    /// Cumulative travel cost.
    pub cost: f64,
}

impl IppState {
    pub fn last(&self) -> usize {
        *self.visited.last().expect("state always holds the start node")
    }

    pub fn is_visited(&self, node: usize) -> bool {
        self.visited_flag[node]
    }

    /// Decisions taken so far.
    pub fn steps(&self) -> usize {
        self.visited.len() - 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RolloutStep {
    pub step: usize,
    pub node: usize,
    /// Fraction of occupied cells newly covered by this visit.
    pub gain: f64,
    pub coverage: f64,
    pub cost: f64,
}

impl RolloutStep {
    pub const CSV_HEADER: &'static str = "step,node_id,gain,cumulative_coverage,cumulative_cost";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.6},{:.6},{:.6}",
            self.step, self.node, self.gain, self.coverage, self.cost
        )
    }
}

impl<'a> IppEnv<'a> {
    pub fn new(
        world: &'a GridWorld,
        graph: &'a SensingGraph,
        start: usize,
        sensor: SensorModel,
        horizon: usize,
        budget: Option<f64>,
    ) -> Result<Self> {
        if start >= graph.len() {
            return Err(Error::contract(format!(
                "start node {start} outside a graph of {} nodes",
                graph.len()
            )));
        }
        let occupied = world.occupied_count();
        if occupied == 0 {
            return Err(Error::UndefinedUtility(
                "coverage of a world without occupied cells".into(),
            ));
        }
        let (w, h) = (world.width(), world.height());
        let mut fans = Vec::with_capacity(graph.len());
        let mut measurements = Vec::with_capacity(graph.len());
        let mut hits = Vec::with_capacity(graph.len());
        for (i, pose) in graph.nodes().iter().enumerate() {
            let c = pose.cell();
            if !world.contains(c.x as i64, c.y as i64) || world.is_occupied(c) {
                return Err(Error::contract(format!("sensing node {i} at {c} is not on a free cell")));
            }
            let fan = RayFan::new(pose, &sensor, w, h);
            let m = Measurement::from_fan(world, i, &fan);
            hits.push(m.hit_cells().iter().map(|v| world.index(*v) as u32).collect());
            fans.push(fan);
            measurements.push(m);
        }
        Ok(IppEnv {
            world,
            graph,
            sensor,
            belief_params: BeliefParams::default(),
            start,
            horizon,
            budget,
            fans,
            measurements,
            hits,
            occupied,
        })
    }

    pub fn occupied(&self) -> usize {
        self.occupied
    }

    pub fn hits(&self, node: usize) -> &[u32] {
        &self.hits[node]
    }

    pub fn fan(&self, node: usize) -> &RayFan {
        &self.fans[node]
    }

    /// State after measuring at the start node.
    pub fn initial_state(&self) -> IppState {
        let (w, h) = (self.world.width(), self.world.height());
        let mut state = IppState {
            belief: OccupancyBelief::new(w, h, self.belief_params),
            coverage: CoverageState::new(w * h),
            visited: Vec::with_capacity(self.horizon + 1),
            visited_flag: vec![false; self.graph.len()],
            cost: 0.0,
        };
        self.visit(&mut state, self.start);
        state
    }

    fn visit(&self, state: &mut IppState, node: usize) -> usize {
        state.visited.push(node);
        state.visited_flag[node] = true;
        state.belief.update(&self.measurements[node]);
        state.coverage.add(&self.hits[node])
    }

    /// Moves to `node`, measures, and returns the newly covered fraction.
    pub fn step(&self, state: &mut IppState, node: usize) -> Result<f64> {
        if state.is_visited(node) {
            return Err(Error::contract(format!("node {node} already visited")));
        }
        let travel = self.graph.cost(state.last(), node);
        if let Some(b) = self.budget {
            if state.cost + travel > b + 1e-9 {
                return Err(Error::contract(format!("moving to node {node} exceeds the budget")));
            }
        }
        state.cost += travel;
        let new = self.visit(state, node);
        Ok(new as f64 / self.occupied as f64)
    }

    pub fn is_done(&self, state: &IppState) -> bool {
        state.steps() >= self.horizon || self.feasible(state).is_empty()
    }

    /// Unvisited nodes reachable within the remaining budget.
    pub fn feasible(&self, state: &IppState) -> Vec<usize> {
        let last = state.last();
        (0..self.graph.len())
            .filter(|&v| !state.is_visited(v))
            .filter(|&v| match self.budget {
                Some(b) => state.cost + self.graph.cost(last, v) <= b + 1e-9,
                None => true,
            })
            .collect()
    }

    pub fn unvisited(&self, state: &IppState) -> Vec<usize> {
        (0..self.graph.len()).filter(|&v| !state.is_visited(v)).collect()
    }

    pub fn gains(&self, state: &IppState, node: usize) -> [f64; 6] {
        info_gains(&state.belief, &self.fans[node])
    }

    /// Six gains followed by `[travelled, dx, dy, 0, 0, 0, dtheta]`.
    pub fn features(&self, state: &IppState, node: usize) -> [f64; IPP_FEATURES] {
        let g = self.gains(state, node);
        let from = self.graph.nodes()[state.last()];
        let to = self.graph.nodes()[node];
        [
            g[0],
            g[1],
            g[2],
            g[3],
            g[4],
            g[5],
            state.cost,
            to.x - from.x,
            to.y - from.y,
            0.0,
            0.0,
            0.0,
            wrap_angle(to.theta - from.theta),
        ]
    }

    pub fn coverage(&self, state: &IppState) -> f64 {
        state.coverage.count() as f64 / self.occupied as f64
    }

    /// Runs `policy` from the start node until the horizon or until no
    /// feasible node remains. The first entry is the start node.
    pub fn rollout(&self, policy: &mut dyn IppPolicy, rng: &mut Rng) -> Result<Vec<RolloutStep>> {
        let mut state = self.initial_state();
        let mut steps = vec![RolloutStep {
            step: 0,
            node: self.start,
            gain: self.coverage(&state),
            coverage: self.coverage(&state),
            cost: 0.0,
        }];
        while state.steps() < self.horizon {
            let feasible = self.feasible(&state);
            if feasible.is_empty() {
                break;
            }
            let node = policy.select(self, &state, &feasible, rng)?;
            let gain = self.step(&mut state, node)?;
            steps.push(RolloutStep {
                step: state.steps(),
                node,
                gain,
                coverage: self.coverage(&state),
                cost: state.cost,
            });
        }
        Ok(steps)
    }
}

/// Chooses the next sensing node from a non-empty feasible set.
pub trait IppPolicy {
    fn name(&self) -> String;
    fn select(&mut self, env: &IppEnv<'_>, state: &IppState, feasible: &[usize], rng: &mut Rng) -> Result<usize>;
}

/// Index of the best score; ties go to the earlier entry.
pub(crate) fn argmax(scores: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.into_iter().enumerate() {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|b| b.0)
}

/// Normalized gain minus `lambda` times normalized travel distance. Both
/// denominators sum over all unvisited nodes.
#[derive(Clone, Copy, Debug)]
pub struct HeuristicPolicy {
    pub kind: GainKind,
    pub lambda: f64,
}

impl HeuristicPolicy {
    pub fn new(kind: GainKind, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) {
            return Err(Error::config("lambda", "must be non-negative"));
        }
        Ok(HeuristicPolicy { kind, lambda })
    }
}

impl IppPolicy for HeuristicPolicy {
    fn name(&self) -> String {
        self.kind.name().to_string()
    }

    fn select(&mut self, env: &IppEnv<'_>, state: &IppState, feasible: &[usize], _rng: &mut Rng) -> Result<usize> {
        let unvisited = env.unvisited(state);
        let last = state.last();
        let k = self.kind.index();
        let mut gain = vec![0.0; env.graph.len()];
        let mut dist = vec![0.0; env.graph.len()];
        let (mut gain_sum, mut dist_sum) = (0.0, 0.0);
        for &v in &unvisited {
            gain[v] = env.gains(state, v)[k];
            dist[v] = env.graph.cost(last, v);
            gain_sum += gain[v];
            dist_sum += dist[v];
        }
        let n = unvisited.len() as f64;
        let norm = |x: f64, sum: f64| if sum > 0.0 { x / sum } else { 1.0 / n };
        let best = argmax(
            feasible
                .iter()
                .map(|&v| norm(gain[v], gain_sum) - self.lambda * norm(dist[v], dist_sum)),
        )
        .ok_or_else(|| Error::contract("empty feasible set"))?;
        Ok(feasible[best])
    }
}

/// Greedy on the true marginal coverage; ties go to the nearer node.
#[derive(Clone, Copy, Debug, Default)]
pub struct OneStepOraclePolicy;

impl IppPolicy for OneStepOraclePolicy {
    fn name(&self) -> String {
        "one-step-oracle".into()
    }

    fn select(&mut self, env: &IppEnv<'_>, state: &IppState, feasible: &[usize], _rng: &mut Rng) -> Result<usize> {
        let last = state.last();
        feasible
            .iter()
            .copied()
            .max_by(|&a, &b| {
                let ga = oracles::onestep_reward(env, state, a);
                let gb = oracles::onestep_reward(env, state, b);
                ga.total_cmp(&gb)
                    .then(env.graph.cost(last, b).total_cmp(&env.graph.cost(last, a)))
                    .then(b.cmp(&a))
            })
            .ok_or_else(|| Error::contract("empty feasible set"))
    }
}

/// Follows the first step of a greedy cost-benefit tour.
#[derive(Clone, Copy, Debug, Default)]
pub struct GcbOraclePolicy;

impl IppPolicy for GcbOraclePolicy {
    fn name(&self) -> String {
        "gcb-oracle".into()
    }

    fn select(&mut self, env: &IppEnv<'_>, state: &IppState, feasible: &[usize], _rng: &mut Rng) -> Result<usize> {
        oracles::gcb_next(env, state, feasible).ok_or_else(|| Error::contract("empty feasible set"))
    }
}

/// Argmax of a learned action value. Holds one model per timestep for a
/// non-stationary policy, or a single model; steps past the end reuse the
/// last model.
#[derive(Clone, Copy, Debug)]
pub struct LearnedIppPolicy<'m> {
    models: &'m [Regressor],
}

impl<'m> LearnedIppPolicy<'m> {
    pub fn new(models: &'m [Regressor]) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::contract("learned policy needs at least one model"));
        }
        for m in models {
            m.check_schema(Schema::Ipp)?;
        }
        Ok(LearnedIppPolicy { models })
    }
}

impl IppPolicy for LearnedIppPolicy<'_> {
    fn name(&self) -> String {
        "learned".into()
    }

    fn select(&mut self, env: &IppEnv<'_>, state: &IppState, feasible: &[usize], _rng: &mut Rng) -> Result<usize> {
        let model = &self.models[state.steps().min(self.models.len() - 1)];
        let best = argmax(feasible.iter().map(|&v| model.predict_slice(&env.features(state, v))))
            .ok_or_else(|| Error::contract("empty feasible set"))?;
        Ok(feasible[best])
    }
}
