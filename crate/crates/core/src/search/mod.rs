//! Generic select-expand search over the implicit 8-connected lattice.
//!
//! The loop keeps three lists: the open list of candidates, the closed list
//! of expanded vertices and the invalid-edge list of edges found to end in an
//! occupied cell. A [`Selector`] picks which open vertex to expand next; the
//! search stops as soon as the goal enters the open list.

mod selectors;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub(crate) use selectors::FrontierQueue;
pub use selectors::{AStar, Greedy, Heuristic, Mha, MhaHeuristic, OBSTACLE_FAR};

use crate::error::{Error, Result};
use crate::grid::{GridWorld, Vertex};
use crate::worldgen::ProblemInstance;

/// Test-time expansion budget used for full-scale evaluations.
pub const TEST_BUDGET: usize = 20_000;

const NONE: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CellState {
    Unseen,
    Open,
    Closed,
}

/// Read-only problem context handed to selectors.
#[derive(Clone, Copy, Debug)]
pub struct SearchContext<'a> {
    pub world: &'a GridWorld,
    pub start: Vertex,
    pub goal: Vertex,
}

impl<'a> SearchContext<'a> {
    pub fn from_instance(inst: &'a ProblemInstance) -> Result<Self> {
        let (start, goal) = inst
            .start_goal()
            .ok_or_else(|| Error::contract("search needs a start/goal instance"))?;
        Ok(SearchContext {
            world: &inst.world,
            start,
            goal,
        })
    }

    pub fn width(&self) -> usize {
        self.world.width()
    }

    pub fn height(&self) -> usize {
        self.world.height()
    }
}

/// Open, closed and invalid lists plus per-vertex bookkeeping.
#[derive(Clone, Debug)]
pub struct SearchFrontier {
    width: usize,
    state: Vec<CellState>,
    parent: Vec<u32>,
    g: Vec<u32>,
    tick: Vec<u64>,
    open: Vec<u32>,
    open_pos: Vec<u32>,
    next_tick: u64,
    closed: usize,
    invalid_edges: Vec<(Vertex, Vertex)>,
    obstacles: Vec<Vertex>,
    obstacle_seen: Vec<bool>,
}

impl SearchFrontier {
    /// Frontier holding only `start` (tick 0, g 0).
    pub fn new(width: usize, height: usize, start: Vertex) -> Self {
        let n = width * height;
        let mut f = SearchFrontier {
            width,
            state: vec![CellState::Unseen; n],
            parent: vec![NONE; n],
            g: vec![NONE; n],
            tick: vec![u64::MAX; n],
            open: Vec::new(),
            open_pos: vec![NONE; n],
            next_tick: 0,
            closed: 0,
            invalid_edges: Vec::new(),
            obstacles: Vec::new(),
            obstacle_seen: vec![false; n],
        };
        f.insert(start, None, 0);
        f
    }

    fn idx(&self, v: Vertex) -> usize {
        v.y as usize * self.width + v.x as usize
    }

    fn vertex(&self, i: u32) -> Vertex {
        Vertex::new(i % self.width as u32, i / self.width as u32)
    }

    fn insert(&mut self, v: Vertex, parent: Option<Vertex>, g: u32) {
        let i = self.idx(v);
        self.state[i] = CellState::Open;
        self.parent[i] = parent.map_or(NONE, |p| self.idx(p) as u32);
        self.g[i] = g;
        self.tick[i] = self.next_tick;
        self.next_tick += 1;
        self.open_pos[i] = self.open.len() as u32;
        self.open.push(i as u32);
    }

    fn close(&mut self, v: Vertex) {
        let i = self.idx(v);
        let pos = self.open_pos[i] as usize;
        self.open.swap_remove(pos);
        if let Some(&moved) = self.open.get(pos) {
            self.open_pos[moved as usize] = pos as u32;
        }
        self.open_pos[i] = NONE;
        self.state[i] = CellState::Closed;
        self.closed += 1;
    }

    pub fn is_open(&self, v: Vertex) -> bool {
        self.state[self.idx(v)] == CellState::Open
    }

    pub fn is_closed(&self, v: Vertex) -> bool {
        self.state[self.idx(v)] == CellState::Closed
    }

    pub fn is_seen(&self, v: Vertex) -> bool {
        self.state[self.idx(v)] != CellState::Unseen
    }

    pub fn open_len(&self) -> usize {
        self.open.len()
    }

    pub fn closed_len(&self) -> usize {
        self.closed
    }

    /// Open vertices in internal (unspecified but deterministic) order.
    pub fn open_vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.open.iter().map(|&i| self.vertex(i))
    }

    /// The `n`-th open vertex in internal order; used for uniform sampling.
    pub fn open_at(&self, n: usize) -> Vertex {
        self.vertex(self.open[n])
    }

    /// Expansion-path length from the start through parent pointers.
    pub fn g(&self, v: Vertex) -> u32 {
        self.g[self.idx(v)]
    }

    /// Depth in the search tree; equal to `g` on a unit-cost lattice.
    pub fn depth(&self, v: Vertex) -> u32 {
        self.g(v)
    }

    pub fn tick(&self, v: Vertex) -> u64 {
        self.tick[self.idx(v)]
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        let p = self.parent[self.idx(v)];
        (p != NONE).then(|| self.vertex(p))
    }

    pub fn invalid_edges(&self) -> &[(Vertex, Vertex)] {
        &self.invalid_edges
    }

    /// Distinct invalid-edge endpoints in discovery order: the known obstacles.
    pub fn obstacles(&self) -> &[Vertex] {
        &self.obstacles
    }

    /// Walks parent pointers from `v` back to the start.
    pub fn path_to(&self, v: Vertex) -> Vec<Vertex> {
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }
}

/// Outcome of a single expansion.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Expansion {
    /// Free neighbors newly added to the open list, in enumeration order.
    pub successors: Vec<Vertex>,
    /// Edges from the expanded vertex into occupied cells.
    pub invalid_edges: Vec<(Vertex, Vertex)>,
    /// Occupied endpoints seen for the first time during this expansion.
    pub new_obstacles: Vec<Vertex>,
    /// Open vertices whose g-value improved through the expanded vertex.
    pub improved: Vec<Vertex>,
}

/// Moves `v` from the open to the closed list and checks its eight edges.
pub fn expand(v: Vertex, world: &GridWorld, frontier: &mut SearchFrontier) -> Result<Expansion> {
    if !frontier.is_open(v) {
        return Err(Error::contract(format!("expand called on {v}, which is not open")));
    }
    frontier.close(v);
    let gv = frontier.g(v);
    let mut out = Expansion::default();
    for u in world.neighbors(v) {
        let i = frontier.idx(u);
        if world.is_occupied(u) {
            out.invalid_edges.push((v, u));
            frontier.invalid_edges.push((v, u));
            if !frontier.obstacle_seen[i] {
                frontier.obstacle_seen[i] = true;
                frontier.obstacles.push(u);
                out.new_obstacles.push(u);
            }
            continue;
        }
        match frontier.state[i] {
            CellState::Unseen => {
                frontier.insert(u, Some(v), gv + 1);
                out.successors.push(u);
            }
            CellState::Open if gv + 1 < frontier.g[i] => {
                frontier.g[i] = gv + 1;
                frontier.parent[i] = frontier.idx(v) as u32;
                out.improved.push(u);
            }
            _ => {}
        }
    }
    Ok(out)
}

/// Policy choosing which open vertex to expand.
pub trait Selector {
    fn name(&self) -> String;

    /// Clears per-run state. Called once before the start vertex is inserted.
    fn reset(&mut self, _ctx: &SearchContext<'_>) {}

    /// A vertex entered the open list (the start included).
    fn on_insert(&mut self, _v: Vertex, _frontier: &SearchFrontier, _ctx: &SearchContext<'_>) {}

    /// An open vertex got a shorter parent path.
    fn on_improve(&mut self, _v: Vertex, _frontier: &SearchFrontier, _ctx: &SearchContext<'_>) {}

    /// `v` was just expanded.
    fn on_expand(&mut self, _v: Vertex, _exp: &Expansion, _frontier: &SearchFrontier, _ctx: &SearchContext<'_>) {}

    /// Returns an open vertex, or `None` when the selector considers the
    /// frontier exhausted.
    fn select(&mut self, frontier: &SearchFrontier, ctx: &SearchContext<'_>) -> Option<Vertex>;
}

/// Hooks into a running search; used for data collection during training.
pub trait SearchObserver {
    /// Before the `t`-th selection (0-based), with the goal not yet open.
    fn before_select(&mut self, _t: usize, _frontier: &SearchFrontier, _ctx: &SearchContext<'_>) {}

    /// After the `t`-th expansion.
    fn after_expand(&mut self, _t: usize, _v: Vertex, _frontier: &SearchFrontier, _ctx: &SearchContext<'_>) {}
}

impl SearchObserver for () {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Found,
    BudgetExhausted,
    FrontierEmpty,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Found => "found",
            Outcome::BudgetExhausted => "budget-exhausted",
            Outcome::FrontierEmpty => "frontier-empty",
        }
    }
}

/// One select-expand cycle, recorded for rendering.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub expanded: Vertex,
    pub successors: Vec<Vertex>,
    pub new_obstacles: Vec<Vertex>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub outcome: Outcome,
    pub expansions: usize,
    pub path: Option<Vec<Vertex>>,
    /// Expanded vertices in order.
    pub expanded: Vec<Vertex>,
    pub trace: Option<Vec<TraceStep>>,
    pub wall_time_ms: f64,
}

impl SearchResult {
    /// Number of edges on the returned path.
    pub fn path_length(&self) -> Option<usize> {
        self.path.as_ref().map(|p| p.len().saturating_sub(1))
    }

    pub fn csv_header() -> &'static str {
        "instance_id,selector_name,outcome,expansions,path_length,wall_time_ms"
    }

    pub fn csv_row(&self, instance_id: usize, selector_name: &str) -> String {
        format!(
            "{instance_id},{selector_name},{},{},{},{:.3}",
            self.outcome.name(),
            self.expansions,
            self.path_length().map_or(String::new(), |l| l.to_string()),
            self.wall_time_ms
        )
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SearchOptions {
    pub trace: bool,
}

pub fn run_search(inst: &ProblemInstance, selector: &mut dyn Selector, budget: usize) -> Result<SearchResult> {
    run_search_with(inst, selector, budget, SearchOptions::default(), &mut ())
}

/// Runs the select-expand loop until the goal enters the open list, the open
/// list empties, or `budget` expansions have been spent.
pub fn run_search_with(
    inst: &ProblemInstance,
    selector: &mut dyn Selector,
    budget: usize,
    opts: SearchOptions,
    observer: &mut dyn SearchObserver,
) -> Result<SearchResult> {
    let clock = Instant::now();
    let ctx = SearchContext::from_instance(inst)?;
    let world = ctx.world;
    let mut frontier = SearchFrontier::new(world.width(), world.height(), ctx.start);
    selector.reset(&ctx);
    selector.on_insert(ctx.start, &frontier, &ctx);
    let mut trace = opts.trace.then(Vec::new);
    let mut expanded = Vec::new();
    let outcome = loop {
        if frontier.is_open(ctx.goal) {
            break Outcome::Found;
        }
        if frontier.open_len() == 0 {
            break Outcome::FrontierEmpty;
        }
        if expanded.len() >= budget {
            break Outcome::BudgetExhausted;
        }
        let t = expanded.len();
        observer.before_select(t, &frontier, &ctx);
        let Some(v) = selector.select(&frontier, &ctx) else {
            break Outcome::FrontierEmpty;
        };
        if !frontier.is_open(v) {
            return Err(Error::contract(format!(
                "selector {} returned {v}, which is not in the open list",
                selector.name()
            )));
        }
        let exp = expand(v, world, &mut frontier)?;
        for &u in &exp.successors {
            selector.on_insert(u, &frontier, &ctx);
        }
        for &u in &exp.improved {
            selector.on_improve(u, &frontier, &ctx);
        }
        selector.on_expand(v, &exp, &frontier, &ctx);
        expanded.push(v);
        observer.after_expand(t, v, &frontier, &ctx);
        if let Some(trace) = trace.as_mut() {
            trace.push(TraceStep {
                expanded: v,
                successors: exp.successors,
                new_obstacles: exp.new_obstacles,
            });
        }
    };
    let path = (outcome == Outcome::Found).then(|| frontier.path_to(ctx.goal));
    Ok(SearchResult {
        outcome,
        expansions: expanded.len(),
        path,
        expanded,
        trace,
        wall_time_ms: clock.elapsed().as_secs_f64() * 1e3,
    })
}

/// Independent re-check of a returned path against the true world.
pub fn path_is_valid(world: &GridWorld, path: &[Vertex], start: Vertex, goal: Vertex) -> bool {
    path.first() == Some(&start)
        && path.last() == Some(&goal)
        && path.iter().all(|&v| world.is_free(v))
        && path.windows(2).all(|w| w[0].is_neighbor(w[1]))
}
