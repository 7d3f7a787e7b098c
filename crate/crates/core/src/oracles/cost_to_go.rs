//! Backward Dijkstra cost-to-go tables and their binary format.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridWorld, Vertex};

/// Stored value for unreachable or capped vertices.
pub const UNREACHABLE: u32 = u32::MAX;

const FORMAT_VERSION: u32 = 1;

/// Finite regression target used in place of an unreachable value.
pub fn unreachable_sentinel(width: usize, height: usize) -> f64 {
    10.0 * (width + height) as f64
}

/// Expansions-to-goal for every vertex of one world under unit edge cost.
#[derive(Clone, Debug, PartialEq)]
pub struct CostToGoTable {
    width: usize,
    height: usize,
    goal: Vertex,
    world_hash: String,
    values: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
    width: usize,
    height: usize,
    goal: Vertex,
    world_hash: String,
}

impl CostToGoTable {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn goal(&self) -> Vertex {
        self.goal
    }

    pub fn world_hash(&self) -> &str {
        &self.world_hash
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// `None` when unreachable.
    pub fn value(&self, v: Vertex) -> Option<u32> {
        let raw = self.values[v.y as usize * self.width + v.x as usize];
        (raw != UNREACHABLE).then_some(raw)
    }

    /// Value with the unreachable case mapped to the regression sentinel.
    pub fn target(&self, v: Vertex) -> f64 {
        self.value(v)
            .map_or(unreachable_sentinel(self.width, self.height), f64::from)
    }

    /// Fails unless the table was built for `world`.
    pub fn check_world(&self, world: &GridWorld) -> Result<()> {
        if world.width() != self.width || world.height() != self.height || world.digest() != self.world_hash {
            return Err(Error::contract("cost-to-go table was built for a different world"));
        }
        Ok(())
    }

    /// JSON header line followed by little-endian `u32` values in row-major
    /// order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let header = Header {
            version: FORMAT_VERSION,
            width: self.width,
            height: self.height,
            goal: self.goal,
            world_hash: self.world_hash.clone(),
        };
        let mut out = serde_json::to_vec(&header).expect("header serializes");
        out.push(b'\n');
        out.reserve(self.values.len() * 4);
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::format("cost-to-go table", "missing header line"))?;
        let header: Header = serde_json::from_slice(&bytes[..nl])
            .map_err(|e| Error::format("cost-to-go table", format!("bad header: {e}")))?;
        if header.version != FORMAT_VERSION {
            return Err(Error::format(
                "cost-to-go table",
                format!("unsupported version {}", header.version),
            ));
        }
        let body = &bytes[nl + 1..];
        let n = header.width * header.height;
        if body.len() != n * 4 {
            return Err(Error::format(
                "cost-to-go table",
                format!("expected {} value bytes, found {}", n * 4, body.len()),
            ));
        }
        let values = body
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Ok(CostToGoTable {
            width: header.width,
            height: header.height,
            goal: header.goal,
            world_hash: header.world_hash,
            values,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

/// Dijkstra from the goal over free 8-connected neighbors with unit cost.
/// With `cap`, vertices farther than the cap are left unreachable.
pub fn backward_dijkstra(world: &GridWorld, goal: Vertex, cap: Option<u32>) -> Result<CostToGoTable> {
    if !world.contains(goal.x as i64, goal.y as i64) || world.is_occupied(goal) {
        return Err(Error::contract(format!("goal {goal} is not a free cell")));
    }
    let mut values = vec![UNREACHABLE; world.len()];
    let mut heap = BinaryHeap::new();
    values[world.index(goal)] = 0;
    heap.push(Reverse((0u32, world.index(goal))));
    while let Some(Reverse((d, i))) = heap.pop() {
        if d > values[i] {
            continue;
        }
        let next = d + 1;
        if cap.is_some_and(|c| next > c) {
            continue;
        }
        for u in world.neighbors(world.vertex(i)) {
            let j = world.index(u);
            if world.is_free(u) && next < values[j] {
                values[j] = next;
                heap.push(Reverse((next, j)));
            }
        }
    }
    Ok(CostToGoTable {
        width: world.width(),
        height: world.height(),
        goal,
        world_hash: world.digest(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::worldgen::{sample_world, Family, FamilyParams, WorldSpec};
    use proptest::prelude::*;

    #[test]
    fn empty_grid_is_chebyshev() {
        let world = GridWorld::new(5, 5).unwrap();
        let t = backward_dijkstra(&world, Vertex::new(4, 4), None).unwrap();
        assert_eq!(t.value(Vertex::new(4, 4)), Some(0));
        assert_eq!(t.value(Vertex::new(0, 0)), Some(4));
        assert_eq!(t.value(Vertex::new(3, 3)), Some(1));
    }

    #[test]
    fn sealed_ring_is_unreachable() {
        let world = GridWorld::from_ascii(&[
            ".......",
            ".#####.",
            ".#...#.",
            ".#...#.",
            ".#####.",
            ".......",
        ])
        .unwrap();
        let t = backward_dijkstra(&world, Vertex::new(0, 0), None).unwrap();
        assert_eq!(t.value(Vertex::new(3, 2)), None);
        assert_eq!(t.target(Vertex::new(3, 2)), 130.0);
        assert_eq!(t.value(Vertex::new(1, 1)), None);
    }

    #[test]
    fn occupied_goal_is_contract_error() {
        let world = GridWorld::from_ascii(&["#.", ".."]).unwrap();
        assert!(matches!(
            backward_dijkstra(&world, Vertex::new(0, 0), None),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn cap_truncates() {
        let world = GridWorld::new(10, 2).unwrap();
        let t = backward_dijkstra(&world, Vertex::new(0, 0), Some(3)).unwrap();
        assert_eq!(t.value(Vertex::new(3, 0)), Some(3));
        assert_eq!(t.value(Vertex::new(4, 0)), None);
    }

    #[test]
    fn bytes_round_trip() {
        let world = GridWorld::from_ascii(&["..#", "...", "#.."]).unwrap();
        let t = backward_dijkstra(&world, Vertex::new(2, 2), None).unwrap();
        let back = CostToGoTable::from_bytes(&t.to_bytes()).unwrap();
        assert_eq!(back, t);
        back.check_world(&world).unwrap();
        let mut other = world.clone();
        other.set(Vertex::new(0, 0), true);
        assert!(back.check_world(&other).is_err());
        let mut truncated = t.to_bytes();
        truncated.pop();
        assert!(CostToGoTable::from_bytes(&truncated).is_err());
    }

    fn forest(seed: u64) -> (GridWorld, Vertex) {
        let spec = WorldSpec {
            family: Family::Forest,
            params: FamilyParams {
                density: 0.05,
                ..FamilyParams::with_size(20, 20)
            },
            seed,
        };
        let world = sample_world(&spec, 0).unwrap();
        let goal = world.nearest_free(19.0, 0.0).unwrap();
        (world, goal)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn matches_forward_bfs(seed in 0u64..10_000) {
            let (world, goal) = forest(seed);
            let t = backward_dijkstra(&world, goal, None).unwrap();
            prop_assert_eq!(t.values(), &world.bfs_distances(goal)[..]);
        }

        #[test]
        fn bellman_residual_is_zero(seed in 0u64..10_000) {
            let (world, goal) = forest(seed);
            let t = backward_dijkstra(&world, goal, None).unwrap();
            for i in 0..world.len() {
                let v = world.vertex(i);
                if v == goal || world.is_occupied(v) {
                    continue;
                }
                if let Some(val) = t.value(v) {
                    let best = world.neighbors(v).filter_map(|u| t.value(u)).min().unwrap();
                    prop_assert_eq!(val, best + 1);
                }
            }
            for i in 0..world.len() {
                if world.is_occupied(world.vertex(i)) {
                    prop_assert_eq!(t.values()[i], UNREACHABLE);
                }
            }
        }
    }
}
