//! Learning search and sensing heuristics by imitating clairvoyant oracles.
//!
//! Two planning domains share one imitation-learning core:
//!
//! * [`search`]: select-expand search on 8-connected occupancy lattices,
//!   where a learned selector imitates backward-Dijkstra cost-to-go.
//! * [`ipp`]: informative path planning on sensing graphs, where a learned
//!   node scorer imitates coverage oracles that see the hidden world.

pub mod baselines;
pub mod bench;
pub mod error;
pub mod grid;
pub mod ipp;
pub mod learn;
pub mod oracles;
pub mod rng;
pub mod sail;
pub mod search;
pub mod worldgen;

pub use error::{Error, Result};
pub use grid::{GridWorld, Vertex};
