//! Informative path planning on 2D occupancy grids.
//!
//! A robot teleports between sensing nodes, each visit casts a fan of rays
//! into the hidden world, and utility is the fraction of occupied cells seen.

mod belief;
mod episode;
mod gain;
mod raycast;
mod train;

use serde::{Deserialize, Serialize};

pub use belief::{log_odds, OccupancyBelief, BeliefParams};
pub use episode::{
    coverage_utility, CoverageState, GcbOraclePolicy, HeuristicPolicy, IppEnv, IppPolicy, IppState,
    LearnedIppPolicy, OneStepOraclePolicy, RolloutStep,
};
pub use gain::{entropy, info_gain, info_gains, GainKind, UNKNOWN_BAND};
pub use raycast::{cast_cells, raycast_measure, Measurement, RayFan, RayReading};
pub use train::{train_ipp, IppAdapter, IppTrainConfig, IppTrained, IppVariant};
pub(crate) use episode::argmax;
pub(crate) use train::ipp_env;

use crate::grid::Vertex;

/// Sensor pose in continuous cell units; `(x, y)` = `(column, row)` with
/// cell centers at half-integers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose { x, y, theta }
    }

    /// Pose at the center of a cell.
    pub fn at_cell(v: Vertex, theta: f64) -> Self {
        Pose::new(v.x as f64 + 0.5, v.y as f64 + 0.5, theta)
    }

    pub fn cell(&self) -> Vertex {
        Vertex::new(self.x.floor().max(0.0) as u32, self.y.floor().max(0.0) as u32)
    }

    pub fn distance(&self, other: &Pose) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut r = a.rem_euclid(tau);
    if r > std::f64::consts::PI {
        r -= tau;
    }
    r
}

/// Fully connected sensing graph; travel cost is straight-line distance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensingGraph {
    nodes: Vec<Pose>,
}

impl SensingGraph {
    pub fn new(nodes: Vec<Pose>) -> Self {
        SensingGraph { nodes }
    }

    pub fn nodes(&self) -> &[Pose] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn cost(&self, a: usize, b: usize) -> f64 {
        self.nodes[a].distance(&self.nodes[b])
    }

    /// Node closest to a point; ties go to the lower index.
    pub fn nearest(&self, x: f64, y: f64) -> usize {
        let probe = Pose::new(x, y, 0.0);
        let mut best = 0;
        for (i, p) in self.nodes.iter().enumerate() {
            if p.distance(&probe) < self.nodes[best].distance(&probe) {
                best = i;
            }
        }
        best
    }

    /// Travel cost of visiting nodes in order.
    pub fn route_cost(&self, route: &[usize]) -> f64 {
        route.windows(2).map(|w| self.cost(w[0], w[1])).sum()
    }
}

/// Range- and field-of-view-limited ray sensor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    /// Field of view in radians.
    pub fov: f64,
    /// Range in cells.
    pub range: f64,
    pub rays: usize,
}

impl SensorModel {
    /// 114 degree field of view, range of a quarter of the grid diagonal, 64 rays.
    pub fn default_for(width: usize, height: usize) -> Self {
        let diag = ((width * width + height * height) as f64).sqrt();
        SensorModel {
            fov: 114f64.to_radians(),
            range: diag / 4.0,
            rays: 64,
        }
    }

    /// Ray angles spread evenly across the field of view around `theta`.
    pub fn angles(&self, theta: f64) -> Vec<f64> {
        if self.rays == 1 {
            return vec![theta];
        }
        let step = self.fov / (self.rays - 1) as f64;
        (0..self.rays).map(|i| theta - self.fov / 2.0 + step * i as f64).collect()
    }
}
