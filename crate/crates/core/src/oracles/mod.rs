//! Clairvoyant oracles that see the whole world at training time.

mod cost_to_go;
mod reward;

pub use cost_to_go::{backward_dijkstra, unreachable_sentinel, CostToGoTable, UNREACHABLE};
pub use reward::{gcb_next, gcb_reward_to_go, onestep_reward, onestep_reward_for, OracleTour};

use crate::grid::Vertex;

/// Oracle action value of expanding `v`: its cost-to-go, with unreachable
/// vertices mapped to the regression sentinel.
pub fn oracle_action_value(table: &CostToGoTable, v: Vertex) -> f64 {
    table.target(v)
}
