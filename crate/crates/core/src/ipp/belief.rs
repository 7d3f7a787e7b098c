//! Per-cell log-odds occupancy belief.

use serde::{Deserialize, Serialize};

use super::raycast::Measurement;
use crate::grid::Vertex;

/// `ln(p / (1 - p))`.
pub fn log_odds(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeliefParams {
    pub p_hit: f64,
    pub p_miss: f64,
    /// Probabilities are clamped to `[eps, 1 - eps]`.
    pub clamp_eps: f64,
}

impl Default for BeliefParams {
    fn default() -> Self {
        BeliefParams {
            p_hit: 0.7,
            p_miss: 0.4,
            clamp_eps: 0.001,
        }
    }
}

/// Occupancy belief over the grid, initialised to 0.5 everywhere.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyBelief {
    width: usize,
    height: usize,
    logit: Vec<f64>,
    params: BeliefParams,
    l_min: f64,
    l_max: f64,
}

impl OccupancyBelief {
    pub fn new(width: usize, height: usize, params: BeliefParams) -> Self {
        OccupancyBelief {
            width,
            height,
            logit: vec![0.0; width * height],
            params,
            l_min: log_odds(params.clamp_eps),
            l_max: log_odds(1.0 - params.clamp_eps),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn prob_at(&self, index: usize) -> f64 {
        1.0 / (1.0 + (-self.logit[index]).exp())
    }

    pub fn prob(&self, v: Vertex) -> f64 {
        self.prob_at(v.y as usize * self.width + v.x as usize)
    }

    pub fn probs(&self) -> Vec<f64> {
        (0..self.logit.len()).map(|i| self.prob_at(i)).collect()
    }

    fn bump(&mut self, index: usize, delta: f64) {
        let l = &mut self.logit[index];
        *l = (*l + delta).clamp(self.l_min, self.l_max);
    }

    /// Bayes update from one measurement. Each cell receives at most one
    /// update per measurement; a cell that is both hit and traversed counts
    /// as a hit.
    pub fn update(&mut self, m: &Measurement) {
        let n = self.logit.len();
        let mut mark = vec![0u8; n];
        for ray in &m.rays {
            for c in &ray.free_cells {
                let i = c.y as usize * self.width + c.x as usize;
                if mark[i] == 0 {
                    mark[i] = 1;
                }
            }
            if let Some(c) = ray.hit {
                mark[c.y as usize * self.width + c.x as usize] = 2;
            }
        }
        let hit = log_odds(self.params.p_hit);
        let miss = log_odds(self.params.p_miss);
        for (i, &m) in mark.iter().enumerate() {
            match m {
                1 => self.bump(i, miss),
                2 => self.bump(i, hit),
                _ => {}
            }
        }
    }
}
