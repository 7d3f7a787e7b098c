//! Selectors driven by a learned cost-to-go estimate or by the oracle table.

use rand::Rng as _;

use super::features::{write_features, SEARCH_FEATURES};
use crate::error::Result;
use crate::grid::Vertex;
use crate::learn::{Regressor, Schema};
use crate::oracles::{oracle_action_value, CostToGoTable};
use crate::rng::Rng;
use crate::search::{FrontierQueue, SearchContext, SearchFrontier, Selector};

/// Expands the open vertex with the smallest predicted cost-to-go. Each
/// vertex is scored once, when it enters the open list.
#[derive(Clone, Debug)]
pub struct LearnedSelector<'m> {
    model: &'m Regressor,
    queue: FrontierQueue,
    buf: [f64; SEARCH_FEATURES],
}

impl<'m> LearnedSelector<'m> {
    pub fn new(model: &'m Regressor) -> Result<Self> {
        model.check_schema(Schema::Search)?;
        Ok(LearnedSelector {
            model,
            queue: FrontierQueue::default(),
            buf: [0.0; SEARCH_FEATURES],
        })
    }

    /// Smallest frozen key over the open list.
    pub(crate) fn min_key(&mut self, frontier: &SearchFrontier) -> Option<f64> {
        self.queue.min_key(frontier)
    }

    fn score(&mut self, v: Vertex, frontier: &SearchFrontier, ctx: &SearchContext<'_>) -> f64 {
        write_features(v, frontier, ctx, &mut self.buf);
        self.model.predict_slice(&self.buf)
    }
}

impl Selector for LearnedSelector<'_> {
    fn name(&self) -> String {
        format!("learned-{}", self.model.kind().name())
    }

    fn reset(&mut self, _ctx: &SearchContext<'_>) {
        self.queue.clear();
    }

    fn on_insert(&mut self, v: Vertex, frontier: &SearchFrontier, ctx: &SearchContext<'_>) {
        let key = self.score(v, frontier, ctx);
        self.queue.push(v, key, frontier, ctx);
    }

    fn select(&mut self, frontier: &SearchFrontier, _ctx: &SearchContext<'_>) -> Option<Vertex> {
        self.queue.pop(frontier)
    }
}

/// Greedy on the true cost-to-go.
#[derive(Clone, Debug)]
pub struct OracleSelector<'t> {
    table: &'t CostToGoTable,
    queue: FrontierQueue,
}

impl<'t> OracleSelector<'t> {
    pub fn new(table: &'t CostToGoTable) -> Self {
        OracleSelector {
            table,
            queue: FrontierQueue::default(),
        }
    }
}

impl Selector for OracleSelector<'_> {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn reset(&mut self, _ctx: &SearchContext<'_>) {
        self.queue.clear();
    }

    fn on_insert(&mut self, v: Vertex, frontier: &SearchFrontier, ctx: &SearchContext<'_>) {
        self.queue.push(v, oracle_action_value(self.table, v), frontier, ctx);
    }

    fn select(&mut self, frontier: &SearchFrontier, _ctx: &SearchContext<'_>) -> Option<Vertex> {
        self.queue.pop(frontier)
    }
}

/// Learner and oracle queues over the same open list. Each selection flips
/// a coin: the oracle queue with probability `beta`, the learner's otherwise.
#[derive(Clone, Debug)]
pub struct DualQueueSelector<'a> {
    learner: LearnedSelector<'a>,
    oracle: OracleSelector<'a>,
    beta: f64,
    rng: Rng,
    oracle_picks: usize,
    picks: usize,
}

impl<'a> DualQueueSelector<'a> {
    pub fn new(model: &'a Regressor, table: &'a CostToGoTable, beta: f64, rng: Rng) -> Result<Self> {
        Ok(DualQueueSelector {
            learner: LearnedSelector::new(model)?,
            oracle: OracleSelector::new(table),
            beta,
            rng,
            oracle_picks: 0,
            picks: 0,
        })
    }

    /// Selections served by the oracle queue so far.
    pub fn oracle_picks(&self) -> usize {
        self.oracle_picks
    }

    pub fn picks(&self) -> usize {
        self.picks
    }
}

impl Selector for DualQueueSelector<'_> {
    fn name(&self) -> String {
        format!("mixed-{:.3}", self.beta)
    }

    fn reset(&mut self, ctx: &SearchContext<'_>) {
        self.learner.reset(ctx);
        self.oracle.reset(ctx);
    }

    fn on_insert(&mut self, v: Vertex, frontier: &SearchFrontier, ctx: &SearchContext<'_>) {
        self.learner.on_insert(v, frontier, ctx);
        self.oracle.on_insert(v, frontier, ctx);
    }

    fn select(&mut self, frontier: &SearchFrontier, ctx: &SearchContext<'_>) -> Option<Vertex> {
        self.picks += 1;
        if self.rng.random::<f64>() < self.beta {
            self.oracle_picks += 1;
            self.oracle.select(frontier, ctx)
        } else {
            self.learner.select(frontier, ctx)
        }
    }
}

/// Learned selector that expands a uniformly random open vertex with
/// probability `epsilon`.
#[derive(Clone, Debug)]
pub struct EpsilonSelector<'m> {
    learner: LearnedSelector<'m>,
    epsilon: f64,
    rng: Rng,
}

impl<'m> EpsilonSelector<'m> {
    pub fn new(model: &'m Regressor, epsilon: f64, rng: Rng) -> Result<Self> {
        Ok(EpsilonSelector {
            learner: LearnedSelector::new(model)?,
            epsilon,
            rng,
        })
    }
}

impl<'m> EpsilonSelector<'m> {
    pub(crate) fn learner_mut(&mut self) -> &mut LearnedSelector<'m> {
        &mut self.learner
    }
}

impl Selector for EpsilonSelector<'_> {
    fn name(&self) -> String {
        format!("epsilon-{:.3}", self.epsilon)
    }

    fn reset(&mut self, ctx: &SearchContext<'_>) {
        self.learner.reset(ctx);
    }

    fn on_insert(&mut self, v: Vertex, frontier: &SearchFrontier, ctx: &SearchContext<'_>) {
        self.learner.on_insert(v, frontier, ctx);
    }

    fn select(&mut self, frontier: &SearchFrontier, ctx: &SearchContext<'_>) -> Option<Vertex> {
        if frontier.open_len() > 0 && self.rng.random::<f64>() < self.epsilon {
            Some(frontier.open_at(self.rng.random_range(0..frontier.open_len())))
        } else {
            self.learner.select(frontier, ctx)
        }
    }
}
