//! Classical selectors: greedy best-first, A*, and round-robin multi-heuristic.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::{Expansion, SearchContext, SearchFrontier, Selector};
use crate::grid::Vertex;

/// Stand-in for "infinitely far" when no obstacle is known yet.
pub const OBSTACLE_FAR: f64 = 1e9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Heuristic {
    Euclidean,
    Manhattan,
    /// Admissible and consistent on the unit-cost 8-connected lattice.
    Chebyshev,
    Zero,
}

impl Heuristic {
    pub fn eval(self, v: Vertex, goal: Vertex) -> f64 {
        match self {
            Heuristic::Euclidean => v.euclidean(goal),
            Heuristic::Manhattan => v.manhattan(goal),
            Heuristic::Chebyshev => v.chebyshev(goal),
            Heuristic::Zero => 0.0,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Heuristic::Euclidean => "euc",
            Heuristic::Manhattan => "man",
            Heuristic::Chebyshev => "cheb",
            Heuristic::Zero => "zero",
        }
    }
}

/// Min-heap entry ordered by key, then insertion tick, then vertex id.
#[derive(Clone, Copy, Debug)]
pub(crate) struct QueueEntry {
    pub key: f64,
    pub tick: u64,
    pub id: u64,
    pub v: Vertex,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key
            .total_cmp(&other.key)
            .then(self.tick.cmp(&other.tick))
            .then(self.id.cmp(&other.id))
    }
}

/// Frozen-key priority queue over open vertices with lazy removal of
/// entries that have since left the open list.
#[derive(Clone, Debug, Default)]
pub(crate) struct FrontierQueue {
    heap: BinaryHeap<Reverse<QueueEntry>>,
}

impl FrontierQueue {
    pub fn clear(&mut self) {
        self.heap.clear();
    }

    pub fn push(&mut self, v: Vertex, key: f64, frontier: &SearchFrontier, ctx: &SearchContext<'_>) {
        self.heap.push(Reverse(QueueEntry {
            key,
            tick: frontier.tick(v),
            id: vertex_id(v, ctx),
            v,
        }));
    }

    /// Minimum-key open vertex, discarding stale entries.
    pub fn pop(&mut self, frontier: &SearchFrontier) -> Option<Vertex> {
        while let Some(Reverse(e)) = self.heap.pop() {
            if frontier.is_open(e.v) {
                return Some(e.v);
            }
        }
        None
    }

    /// Smallest key among open entries, discarding stale ones from the top.
    pub fn min_key(&mut self, frontier: &SearchFrontier) -> Option<f64> {
        while let Some(Reverse(e)) = self.heap.peek() {
            if frontier.is_open(e.v) {
                return Some(e.key);
            }
            self.heap.pop();
        }
        None
    }

    /// Live (still open) entries.
    #[cfg(test)]
    pub fn live(&self, frontier: &SearchFrontier) -> Vec<QueueEntry> {
        self.heap.iter().map(|r| r.0).filter(|e| frontier.is_open(e.v)).collect()
    }
}

pub(crate) fn vertex_id(v: Vertex, ctx: &SearchContext<'_>) -> u64 {
    v.y as u64 * ctx.width() as u64 + v.x as u64
}

/// Greedy best-first search: expands the open vertex minimizing `h(v, goal)`.
#[derive(Clone, Debug)]
pub struct Greedy {
    heuristic: Heuristic,
    queue: FrontierQueue,
}

impl Greedy {
    pub fn new(heuristic: Heuristic) -> Self {
        Greedy {
            heuristic,
            queue: FrontierQueue::default(),
        }
    }
}

impl Selector for Greedy {
    fn name(&self) -> String {
        format!("greedy-{}", self.heuristic.tag())
    }

    fn reset(&mut self, _ctx: &SearchContext<'_>) {
        self.queue.clear();
    }

    fn on_insert(&mut self, v: Vertex, frontier: &SearchFrontier, ctx: &SearchContext<'_>) {
        self.queue.push(v, self.heuristic.eval(v, ctx.goal), frontier, ctx);
    }

    fn select(&mut self, frontier: &SearchFrontier, _ctx: &SearchContext<'_>) -> Option<Vertex> {
        self.queue.pop(frontier)
    }
}

/// A*: expands the open vertex minimizing `g(v) + h(v, goal)`. Vertices whose
/// g improves are re-queued; the stale entry is skipped when popped.
#[derive(Clone, Debug)]
pub struct AStar {
    heuristic: Heuristic,
    heap: BinaryHeap<Reverse<(QueueEntry, u32)>>,
}

impl AStar {
    pub fn new(heuristic: Heuristic) -> Self {
        AStar {
            heuristic,
            heap: BinaryHeap::new(),
        }
    }

    fn push(&mut self, v: Vertex, frontier: &SearchFrontier, ctx: &SearchContext<'_>) {
        let g = frontier.g(v);
        let entry = QueueEntry {
            key: g as f64 + self.heuristic.eval(v, ctx.goal),
            tick: frontier.tick(v),
            id: vertex_id(v, ctx),
            v,
        };
        self.heap.push(Reverse((entry, g)));
    }
}

impl Default for AStar {
    fn default() -> Self {
        AStar::new(Heuristic::Chebyshev)
    }
}

impl Selector for AStar {
    fn name(&self) -> String {
        match self.heuristic {
            Heuristic::Chebyshev => "astar".into(),
            Heuristic::Zero => "ucs".into(),
            h => format!("astar-{}", h.tag()),
        }
    }

    fn reset(&mut self, _ctx: &SearchContext<'_>) {
        self.heap.clear();
    }

    fn on_insert(&mut self, v: Vertex, frontier: &SearchFrontier, ctx: &SearchContext<'_>) {
        self.push(v, frontier, ctx);
    }

    fn on_improve(&mut self, v: Vertex, frontier: &SearchFrontier, ctx: &SearchContext<'_>) {
        self.push(v, frontier, ctx);
    }

    fn select(&mut self, frontier: &SearchFrontier, _ctx: &SearchContext<'_>) -> Option<Vertex> {
        while let Some(Reverse((e, g))) = self.heap.pop() {
            if frontier.is_open(e.v) && frontier.g(e.v) == g {
                return Some(e.v);
            }
        }
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MhaHeuristic {
    Euclidean,
    Manhattan,
    /// Euclidean distance to the nearest known obstacle (invalid-edge endpoint).
    ObstacleDistance,
}

/// Round-robin multi-heuristic greedy search. Each call to `select` uses the
/// next heuristic in the list and picks greedily under it.
#[derive(Clone, Debug)]
pub struct Mha {
    heuristics: Vec<MhaHeuristic>,
    cursor: usize,
    obstacle_dist: Vec<f64>,
}

impl Mha {
    /// Panics on an empty heuristic list.
    pub fn new(heuristics: Vec<MhaHeuristic>) -> Self {
        assert!(!heuristics.is_empty(), "round robin needs at least one heuristic");
        Mha {
            heuristics,
            cursor: 0,
            obstacle_dist: Vec::new(),
        }
    }

    /// The standard `[h_EUC, h_MAN, d_OBS]` schedule.
    pub fn standard() -> Self {
        Mha::new(vec![
            MhaHeuristic::Euclidean,
            MhaHeuristic::Manhattan,
            MhaHeuristic::ObstacleDistance,
        ])
    }

    /// Index of the heuristic the next `select` call will use.
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    fn score(&self, h: MhaHeuristic, v: Vertex, ctx: &SearchContext<'_>) -> f64 {
        match h {
            MhaHeuristic::Euclidean => v.euclidean(ctx.goal),
            MhaHeuristic::Manhattan => v.manhattan(ctx.goal),
            MhaHeuristic::ObstacleDistance => self.obstacle_dist[vertex_id(v, ctx) as usize],
        }
    }
}

impl Selector for Mha {
    fn name(&self) -> String {
        "mha".into()
    }

    fn reset(&mut self, ctx: &SearchContext<'_>) {
        self.cursor = 0;
        self.obstacle_dist = vec![OBSTACLE_FAR; ctx.width() * ctx.height()];
    }

    fn on_insert(&mut self, v: Vertex, frontier: &SearchFrontier, ctx: &SearchContext<'_>) {
        let d = frontier
            .obstacles()
            .iter()
            .map(|&o| v.euclidean(o))
            .fold(OBSTACLE_FAR, f64::min);
        self.obstacle_dist[vertex_id(v, ctx) as usize] = d;
    }

    fn on_expand(&mut self, _v: Vertex, exp: &Expansion, frontier: &SearchFrontier, ctx: &SearchContext<'_>) {
        if exp.new_obstacles.is_empty() {
            return;
        }
        for u in frontier.open_vertices() {
            let i = vertex_id(u, ctx) as usize;
            for &o in &exp.new_obstacles {
                self.obstacle_dist[i] = self.obstacle_dist[i].min(u.euclidean(o));
            }
        }
    }

    fn select(&mut self, frontier: &SearchFrontier, ctx: &SearchContext<'_>) -> Option<Vertex> {
        let h = self.heuristics[self.cursor];
        self.cursor = (self.cursor + 1) % self.heuristics.len();
        frontier
            .open_vertices()
            .map(|v| QueueEntry {
                key: self.score(h, v, ctx),
                tick: frontier.tick(v),
                id: vertex_id(v, ctx),
                v,
            })
            .min()
            .map(|e| e.v)
    }
}
