//! Parametric world distributions and problem instances.

mod dataset;
mod families;

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

pub use dataset::{read_dataset, write_dataset, Dataset, DatasetMeta, Manifest, ManifestEntry};

use crate::error::{Error, Result};
use crate::grid::{GridWorld, Vertex};
use crate::ipp::{Pose, SensingGraph};
use crate::rng;

/// Resample cap for draws that violate a solvability requirement.
pub const MAX_RESAMPLES: u64 = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    GapWall,
    BiasedGapWall,
    Bugtrap,
    Forest,
    Maze,
    ParallelLines,
    DistributedBlocks,
    Mixed,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::GapWall,
        Family::BiasedGapWall,
        Family::Bugtrap,
        Family::Forest,
        Family::Maze,
        Family::ParallelLines,
        Family::DistributedBlocks,
        Family::Mixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::GapWall => "gap-wall",
            Family::BiasedGapWall => "biased-gap-wall",
            Family::Bugtrap => "bugtrap",
            Family::Forest => "forest",
            Family::Maze => "maze",
            Family::ParallelLines => "parallel-lines",
            Family::DistributedBlocks => "distributed-blocks",
            Family::Mixed => "mixed",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::config("family", format!("unknown family `{s}`")))
    }
}

/// Family-specific generator parameters. Every family reads the subset it
/// needs; the full record is persisted with each dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FamilyParams {
    pub width: usize,
    pub height: usize,
    /// Forest: expected circle centers per cell.
    pub density: f64,
    /// Forest: circle radius in cells.
    pub obstacle_radius: f64,
    pub wall_thickness: usize,
    pub gap_width: usize,
    /// Biased gap wall: probability that the gap lies in the bottom half.
    pub bottom_bias: f64,
    /// Bugtrap: side length as a fraction of the smaller map dimension.
    pub trap_size: f64,
    /// Bugtrap: mouth size as a fraction of the trap half-size.
    pub trap_mouth: f64,
    /// Bugtrap: maximum center offset in cells.
    pub trap_jitter: usize,
    /// Maze: corridor width in cells.
    pub corridor: usize,
    /// Maze: probability of knocking out an extra interior wall.
    pub loop_prob: f64,
    pub line_count: usize,
    pub line_spacing: usize,
    /// Parallel lines: segment length as a fraction of the map extent.
    pub line_length: f64,
    pub block_count: usize,
    pub block_size: usize,
}

impl Default for FamilyParams {
    fn default() -> Self {
        FamilyParams {
            width: 32,
            height: 32,
            density: 0.02,
            obstacle_radius: 1.5,
            wall_thickness: 1,
            gap_width: 2,
            bottom_bias: 0.7,
            trap_size: 0.6,
            trap_mouth: 0.5,
            trap_jitter: 2,
            corridor: 2,
            loop_prob: 0.1,
            line_count: 4,
            line_spacing: 4,
            line_length: 0.6,
            block_count: 8,
            block_size: 4,
        }
    }
}

impl FamilyParams {
    pub fn with_size(width: usize, height: usize) -> Self {
        FamilyParams {
            width,
            height,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |param: &str, reason: String| {
            Err(Error::Generation {
                param: param.to_string(),
                reason,
            })
        };
        if self.width < 2 || self.height < 2 {
            return bad("width", format!("grid {}x{} below 2x2", self.width, self.height));
        }
        for (name, p) in [
            ("bottom_bias", self.bottom_bias),
            ("loop_prob", self.loop_prob),
            ("trap_mouth", self.trap_mouth),
            ("line_length", self.line_length),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(name, format!("probability/fraction {p} outside [0,1]"));
            }
        }
        if !(self.density >= 0.0 && self.density.is_finite()) {
            return bad("density", format!("{} must be finite and nonnegative", self.density));
        }
        if !(self.obstacle_radius >= 0.0 && self.obstacle_radius.is_finite()) {
            return bad("obstacle_radius", "must be finite and nonnegative".into());
        }
        if !(self.trap_size > 0.0 && self.trap_size <= 1.0) {
            return bad("trap_size", format!("{} outside (0,1]", self.trap_size));
        }
        if self.wall_thickness == 0 || self.wall_thickness >= self.width {
            return bad(
                "wall_thickness",
                format!("{} leaves no free columns", self.wall_thickness),
            );
        }
        if self.gap_width == 0 || self.gap_width > self.height {
            return bad("gap_width", format!("{} not in [1, height]", self.gap_width));
        }
        if self.corridor == 0 {
            return bad("corridor", "must be at least one cell".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldSpec {
    pub family: Family,
    pub params: FamilyParams,
    pub seed: u64,
}

impl WorldSpec {
    pub fn new(family: Family, params: FamilyParams, seed: u64) -> Self {
        WorldSpec {
            family,
            params,
            seed,
        }
    }
}

/// Deterministic world draw for `(spec, index)`.
pub fn sample_world(spec: &WorldSpec, index: u64) -> Result<GridWorld> {
    sample_world_attempt(spec, index, 0)
}

fn sample_world_attempt(spec: &WorldSpec, index: u64, attempt: u64) -> Result<GridWorld> {
    spec.params.validate()?;
    let mut rng = rng::rng_for(spec.seed, &[index, attempt]);
    let world = families::generate(spec.family, &spec.params, &mut rng)?;
    if world.free_count() == 0 {
        let param = match spec.family {
            Family::Forest | Family::Mixed => "density",
            Family::DistributedBlocks => "block_count",
            Family::ParallelLines => "line_count",
            _ => "wall_thickness",
        };
        return Err(Error::Generation {
            param: param.into(),
            reason: "no free cells left".into(),
        });
    }
    Ok(world)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Task {
    Search { start: Vertex, goal: Vertex },
    Ipp { graph: SensingGraph, start_node: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    pub world: GridWorld,
    pub task: Task,
}

impl ProblemInstance {
    pub fn search(world: GridWorld, start: Vertex, goal: Vertex) -> Result<Self> {
        let inst = ProblemInstance {
            world,
            task: Task::Search { start, goal },
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn start_goal(&self) -> Option<(Vertex, Vertex)> {
        match self.task {
            Task::Search { start, goal } => Some((start, goal)),
            Task::Ipp { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let in_bounds = |v: Vertex| (v.x as usize) < self.world.width() && (v.y as usize) < self.world.height();
        match &self.task {
            Task::Search { start, goal } => {
                for (name, v) in [("start", start), ("goal", goal)] {
                    if !in_bounds(*v) {
                        return Err(Error::contract(format!("{name} {v} out of bounds")));
                    }
                    if self.world.is_occupied(*v) {
                        return Err(Error::contract(format!("{name} {v} on occupied cell")));
                    }
                }
            }
            Task::Ipp { graph, start_node } => {
                if *start_node >= graph.len() {
                    return Err(Error::contract("start node outside sensing graph"));
                }
                for (i, p) in graph.nodes().iter().enumerate() {
                    let c = p.cell();
                    if !in_bounds(c) || self.world.is_occupied(c) {
                        return Err(Error::contract(format!("sensing node {i} not on a free cell")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Search instance from the free cells nearest the bottom-left and top-right
/// corners. Unsolvable draws are resampled up to [`MAX_RESAMPLES`] times.
pub fn sample_search_instance(spec: &WorldSpec, index: u64) -> Result<(ProblemInstance, u64)> {
    for attempt in 0..MAX_RESAMPLES {
        let world = sample_world_attempt(spec, index, attempt)?;
        let (w, h) = (world.width() as f64, world.height() as f64);
        let start = world.nearest_free(0.0, h - 1.0);
        let goal = world.nearest_free(w - 1.0, 0.0);
        if let (Some(start), Some(goal)) = (start, goal) {
            if start != goal && world.connected(start, goal) {
                if attempt > 0 {
                    log::debug!("{} index {index}: resampled {attempt} times", spec.family);
                }
                return Ok((ProblemInstance::search(world, start, goal)?, attempt));
            }
        }
    }
    Err(Error::Generation {
        param: "seed".into(),
        reason: format!("no solvable {} world after {MAX_RESAMPLES} draws", spec.family),
    })
}

/// Sensing instance: `nodes` poses on distinct free cells with uniform
/// headings; the start node is the one nearest the grid center.
pub fn sample_ipp_instance(spec: &WorldSpec, index: u64, nodes: usize) -> Result<(ProblemInstance, u64)> {
    if nodes == 0 {
        return Err(Error::config("nodes", "need at least one sensing node"));
    }
    for attempt in 0..MAX_RESAMPLES {
        let world = sample_world_attempt(spec, index, attempt)?;
        if world.occupied_count() == 0 || world.free_count() < nodes {
            continue;
        }
        let mut rng = rng::rng_for(spec.seed, &[index, attempt, 0x1bb]);
        let mut free: Vec<usize> = (0..world.len()).filter(|&i| !world.cells()[i]).collect();
        // partial Fisher-Yates
        for i in 0..nodes {
            let j = rng.random_range(i..free.len());
            free.swap(i, j);
        }
        let poses: Vec<Pose> = free[..nodes]
            .iter()
            .map(|&i| {
                let v = world.vertex(i);
                Pose::at_cell(v, rng.random_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        let graph = SensingGraph::new(poses);
        let (cx, cy) = (world.width() as f64 / 2.0, world.height() as f64 / 2.0);
        let start_node = graph.nearest(cx, cy);
        let inst = ProblemInstance {
            world,
            task: Task::Ipp { graph, start_node },
        };
        inst.validate()?;
        return Ok((inst, attempt));
    }
    Err(Error::Generation {
        param: "seed".into(),
        reason: format!("no usable {} sensing world after {MAX_RESAMPLES} draws", spec.family),
    })
}

/// Row of the gap's first cell in a (biased) gap-wall world, if the world
/// has the single-wall layout.
pub fn gap_rows(world: &GridWorld, params: &FamilyParams) -> Vec<u32> {
    let x0 = (world.width() - params.wall_thickness) / 2;
    (0..world.height() as u32)
        .filter(|&y| world.is_free(Vertex::new(x0 as u32, y)))
        .collect()
}
