//! Myopic information-gain heuristics over an occupancy belief.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::belief::OccupancyBelief;
use super::raycast::RayFan;
use crate::error::{Error, Result};

/// Half-width of the band around 0.5 in which a cell counts as unknown.
pub const UNKNOWN_BAND: f64 = 0.05;

/// Natural-log binary entropy with `0 ln 0 = 0`.
pub fn entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.ln() };
    term(p) + term(1.0 - p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainKind {
    AvgEntropy,
    OcclusionAware,
    UnobservedVoxel,
    UnobservedEntropy,
    RearSideVoxel,
    RearSideEntropy,
}

impl GainKind {
    pub const ALL: [GainKind; 6] = [
        GainKind::AvgEntropy,
        GainKind::OcclusionAware,
        GainKind::UnobservedVoxel,
        GainKind::UnobservedEntropy,
        GainKind::RearSideVoxel,
        GainKind::RearSideEntropy,
    ];

    pub fn index(self) -> usize {
        GainKind::ALL.iter().position(|&k| k == self).unwrap()
    }

    pub fn name(self) -> &'static str {
        match self {
            GainKind::AvgEntropy => "avg-entropy",
            GainKind::OcclusionAware => "occlusion-aware",
            GainKind::UnobservedVoxel => "unobserved-voxel",
            GainKind::UnobservedEntropy => "unobserved-entropy",
            GainKind::RearSideVoxel => "rear-side-voxel",
            GainKind::RearSideEntropy => "rear-side-entropy",
        }
    }
}

impl fmt::Display for GainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GainKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::contract(format!("unrecognized information-gain heuristic `{s}`")))
    }
}

/// All six gains for one ray fan, indexed as [`GainKind::ALL`].
pub fn info_gains(belief: &OccupancyBelief, fan: &RayFan) -> [f64; 6] {
    let w = belief.width();
    let mut sums = [0.0; 6];
    for ray in &fan.cells {
        let mut visible = 1.0;
        let mut prev_occupied = false;
        for c in ray {
            let p = belief.prob_at(c.y as usize * w + c.x as usize);
            let h = entropy(p);
            let unknown = (p - 0.5).abs() < UNKNOWN_BAND;
            let rear = unknown && prev_occupied;
            let hv = visible * h;
            sums[0] += h;
            sums[1] += hv;
            if unknown {
                sums[2] += 1.0;
                sums[3] += hv;
            }
            if rear {
                sums[4] += 1.0;
                sums[5] += hv;
            }
            visible *= 1.0 - p;
            prev_occupied = p > 0.5 + UNKNOWN_BAND;
        }
    }
    sums
}

pub fn info_gain(kind: GainKind, belief: &OccupancyBelief, fan: &RayFan) -> f64 {
    info_gains(belief, fan)[kind.index()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridWorld, Vertex};
    use crate::ipp::{raycast_measure, BeliefParams, Pose, SensorModel};
    use proptest::prelude::*;

    #[test]
    fn entropy_extremes() {
        assert!((entropy(0.5) - 2f64.ln()).abs() < 1e-12);
        assert_eq!(entropy(0.0), 0.0);
        assert_eq!(entropy(1.0), 0.0);
    }

    #[test]
    fn unknown_name_is_contract_error() {
        assert!(matches!("bogus".parse::<GainKind>(), Err(Error::Contract(_))));
        for k in GainKind::ALL {
            assert_eq!(k.name().parse::<GainKind>().unwrap(), k);
        }
    }

    fn observed_belief() -> OccupancyBelief {
        let mut world = GridWorld::new(10, 10).unwrap();
        world.set(Vertex::new(6, 5), true);
        let mut b = OccupancyBelief::new(10, 10, BeliefParams::default());
        let sensor = SensorModel {
            fov: 0.05,
            range: 8.0,
            rays: 1,
        };
        for _ in 0..2 {
            let m = raycast_measure(&world, 0, &Pose::new(2.5, 5.5, 0.0), &sensor).unwrap();
            b.update(&m);
        }
        b
    }

    #[test]
    fn unobserved_entropy_matches_hand_computation() {
        let b = observed_belief();
        let ray: Vec<Vertex> = (4..10).map(|x| Vertex::new(x, 5)).collect();
        let fan = RayFan {
            angles: vec![0.0],
            cells: vec![ray.clone()],
        };
        let mut expected = 0.0;
        let mut vis = 1.0;
        for c in &ray {
            let p = b.prob(*c);
            let indicator = if p > 0.45 && p < 0.55 { 1.0 } else { 0.0 };
            expected += indicator * vis * entropy(p);
            vis *= 1.0 - p;
        }
        let got = info_gain(GainKind::UnobservedEntropy, &b, &fan);
        assert!(expected > 0.0);
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn rear_side_counts_cell_behind_believed_obstacle() {
        let b = observed_belief();
        let fan = RayFan {
            angles: vec![0.0],
            cells: vec![(3..10).map(|x| Vertex::new(x, 5)).collect()],
        };
        assert_eq!(info_gain(GainKind::RearSideVoxel, &b, &fan), 1.0);
    }

    proptest! {
        #[test]
        fn entropy_is_symmetric(p in 0.0f64..=1.0) {
            prop_assert!((entropy(p) - entropy(1.0 - p)).abs() < 1e-12);
        }

        #[test]
        fn gains_are_nonnegative(seed in 0u64..500, theta in 0.0f64..std::f64::consts::TAU) {
            use rand::{Rng as _, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut world = GridWorld::new(16, 16).unwrap();
            for _ in 0..30 {
                world.set(Vertex::new(rng.random_range(0..16), rng.random_range(0..16)), true);
            }
            world.set(Vertex::new(8, 8), false);
            let sensor = SensorModel::default_for(16, 16);
            let mut b = OccupancyBelief::new(16, 16, BeliefParams::default());
            let pose = Pose::new(8.5, 8.5, theta);
            b.update(&raycast_measure(&world, 0, &pose, &sensor).unwrap());
            let fan = RayFan::new(&Pose::new(8.5, 8.5, theta + 1.0), &sensor, 16, 16);
            for g in info_gains(&b, &fan) {
                prop_assert!(g >= 0.0);
            }
        }
    }
}
