//! Browser bindings for the static demo page in `www/`.
//!
//! Each exported type owns a generated world. The page calls into it to run a
//! search and replay the wavefront, to paint the exact cost-to-go from a
//! clicked goal, and to roll out an information-gain policy on a survey map.
//! The logic lives in plain methods so it also builds and tests natively.

use clairvoyant::bench::SearchMethod;
use clairvoyant::grid::Vertex;
use clairvoyant::ipp::{GainKind, HeuristicPolicy, IppEnv, SensorModel};
use clairvoyant::oracles::backward_dijkstra;
use clairvoyant::rng::rng_for;
use clairvoyant::search::{Outcome, SearchOptions};
use clairvoyant::worldgen::{
    sample_ipp_instance, sample_search_instance, Family, FamilyParams, ProblemInstance, Task, WorldSpec,
};
use wasm_bindgen::prelude::*;

const MAX_SIZE: usize = 128;

fn fail(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn spec(family: &str, size: usize, seed: u64) -> clairvoyant::Result<WorldSpec> {
    let family: Family = family.parse()?;
    if !(8..=MAX_SIZE).contains(&size) {
        return Err(clairvoyant::Error::config("size", format!("must lie in 8..={MAX_SIZE}")));
    }
    let params = FamilyParams::with_size(size, size);
    params.validate()?;
    Ok(WorldSpec::new(family, params, seed))
}

fn occupancy(inst: &ProblemInstance) -> Vec<u8> {
    inst.world.cells().iter().map(|&c| c as u8).collect()
}

/// Expansion order and path from one search, as flat cell indices.
#[wasm_bindgen]
pub struct Wavefront {
    order: Vec<u32>,
    path: Vec<u32>,
    found: bool,
}

#[wasm_bindgen]
impl Wavefront {
    #[wasm_bindgen(getter)]
    pub fn order(&self) -> Vec<u32> {
        self.order.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn path(&self) -> Vec<u32> {
        self.path.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn found(&self) -> bool {
        self.found
    }
}

/// A search world with a start and goal.
#[wasm_bindgen]
pub struct SearchWorld {
    inst: ProblemInstance,
}

impl SearchWorld {
    pub fn generate(family: &str, size: usize, seed: u64) -> clairvoyant::Result<SearchWorld> {
        let (inst, _) = sample_search_instance(&spec(family, size, seed)?, 0)?;
        Ok(SearchWorld { inst })
    }

    pub fn wavefront(&self, method: &str, budget: usize) -> clairvoyant::Result<Wavefront> {
        let m = SearchMethod::classical(method)
            .ok_or_else(|| clairvoyant::Error::config("method", format!("unknown search method {method:?}")))?;
        let r = m.run_with(&self.inst, budget, SearchOptions { trace: false })?;
        let index = |v: &Vertex| self.inst.world.index(*v) as u32;
        Ok(Wavefront {
            order: r.expanded.iter().map(index).collect(),
            path: r.path.iter().flatten().map(index).collect(),
            found: r.outcome == Outcome::Found,
        })
    }

    /// Cost-to-go to `(x, y)` for every cell; -1 marks cells that cannot reach it.
    pub fn cost_to_go(&self, x: u32, y: u32) -> clairvoyant::Result<Vec<i32>> {
        let w = &self.inst.world;
        if !w.contains(x as i64, y as i64) {
            return Err(clairvoyant::Error::config("goal", "outside the world"));
        }
        let goal = Vertex::new(x, y);
        let table = backward_dijkstra(w, goal, None)?;
        Ok((0..w.len())
            .map(|i| table.value(w.vertex(i)).map_or(-1, |c| c as i32))
            .collect())
    }
}

#[wasm_bindgen]
impl SearchWorld {
    #[wasm_bindgen(constructor)]
    pub fn new(family: &str, size: usize, seed: u64) -> Result<SearchWorld, JsError> {
        Self::generate(family, size, seed).map_err(fail)
    }

    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.inst.world.width()
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> usize {
        self.inst.world.height()
    }

    /// One byte per cell, 1 for occupied.
    #[wasm_bindgen(getter)]
    pub fn cells(&self) -> Vec<u8> {
        occupancy(&self.inst)
    }

    #[wasm_bindgen(getter)]
    pub fn start(&self) -> u32 {
        let (s, _) = self.inst.start_goal().expect("search task");
        self.inst.world.index(s) as u32
    }

    #[wasm_bindgen(getter)]
    pub fn goal(&self) -> u32 {
        let (_, g) = self.inst.start_goal().expect("search task");
        self.inst.world.index(g) as u32
    }

    pub fn search(&self, method: &str, budget: usize) -> Result<Wavefront, JsError> {
        self.wavefront(method, budget).map_err(fail)
    }

    #[wasm_bindgen(js_name = costToGo)]
    pub fn cost_to_go_js(&self, x: u32, y: u32) -> Result<Vec<i32>, JsError> {
        self.cost_to_go(x, y).map_err(fail)
    }
}

/// A parallel-lines survey map with a sensing graph.
#[wasm_bindgen]
pub struct SurveyWorld {
    inst: ProblemInstance,
}

impl SurveyWorld {
    pub fn generate(size: usize, seed: u64, nodes: usize) -> clairvoyant::Result<SurveyWorld> {
        let (inst, _) = sample_ipp_instance(&spec("parallel-lines", size, seed)?, 0, nodes)?;
        Ok(SurveyWorld { inst })
    }

    fn graph(&self) -> (&clairvoyant::ipp::SensingGraph, usize) {
        match &self.inst.task {
            Task::Ipp { graph, start_node } => (graph, *start_node),
            Task::Search { .. } => unreachable!("survey worlds carry a sensing graph"),
        }
    }

    /// Visited node ids, starting with the start node, and the coverage after
    /// each visit.
    pub fn rollout(&self, gain: &str, lambda: f64, horizon: usize) -> clairvoyant::Result<(Vec<u32>, Vec<f64>)> {
        let kind: GainKind = gain.parse()?;
        let (graph, start) = self.graph();
        let w = &self.inst.world;
        let env = IppEnv::new(w, graph, start, SensorModel::default_for(w.width(), w.height()), horizon, None)?;
        let mut policy = HeuristicPolicy::new(kind, lambda)?;
        let steps = env.rollout(&mut policy, &mut rng_for(0, &[]))?;
        Ok((
            steps.iter().map(|s| s.node as u32).collect(),
            steps.iter().map(|s| s.coverage).collect(),
        ))
    }
}

/// Route and coverage curve from one survey rollout.
#[wasm_bindgen]
pub struct Survey {
    route: Vec<u32>,
    coverage: Vec<f64>,
}

#[wasm_bindgen]
impl Survey {
    #[wasm_bindgen(getter)]
    pub fn route(&self) -> Vec<u32> {
        self.route.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn coverage(&self) -> Vec<f64> {
        self.coverage.clone()
    }
}

#[wasm_bindgen]
impl SurveyWorld {
    #[wasm_bindgen(constructor)]
    pub fn new(size: usize, seed: u64, nodes: usize) -> Result<SurveyWorld, JsError> {
        Self::generate(size, seed, nodes).map_err(fail)
    }

    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.inst.world.width()
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> usize {
        self.inst.world.height()
    }

    #[wasm_bindgen(getter)]
    pub fn cells(&self) -> Vec<u8> {
        occupancy(&self.inst)
    }

    /// Node positions as interleaved x, y pairs in cell units.
    #[wasm_bindgen(getter)]
    pub fn nodes(&self) -> Vec<f64> {
        self.graph().0.nodes().iter().flat_map(|p| [p.x, p.y]).collect()
    }

    pub fn survey(&self, gain: &str, lambda: f64, horizon: usize) -> Result<Survey, JsError> {
        let (route, coverage) = self.rollout(gain, lambda, horizon).map_err(fail)?;
        Ok(Survey { route, coverage })
    }
}
