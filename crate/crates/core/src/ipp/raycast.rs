//! Supercover ray traversal and simulated measurements.

use super::{Pose, SensorModel};
use crate::error::{Error, Result};
use crate::grid::{GridWorld, Vertex};

const CORNER_EPS: f64 = 1e-9;

/// Cells crossed by the segment from `origin` along `angle` up to `range`,
/// in order of entry, excluding the origin cell. When the segment passes
/// exactly through a lattice corner, both side cells are reported (lower
/// row-major index first) before the diagonal cell.
pub fn cast_cells(origin: (f64, f64), angle: f64, range: f64, width: usize, height: usize) -> Vec<Vertex> {
    let (ox, oy) = origin;
    let (dx, dy) = (angle.cos(), angle.sin());
    let mut ix = ox.floor() as i64;
    let mut iy = oy.floor() as i64;
    let inside = |x: i64, y: i64| x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height;
    let mut out = Vec::new();
    if !inside(ix, iy) {
        return out;
    }
    let step_x: i64 = if dx > 0.0 { 1 } else { -1 };
    let step_y: i64 = if dy > 0.0 { 1 } else { -1 };
    let axis = |d: f64, o: f64, i: i64| -> (f64, f64) {
        if d.abs() < 1e-15 {
            (f64::INFINITY, f64::INFINITY)
        } else if d > 0.0 {
            ((i as f64 + 1.0 - o) / d, 1.0 / d)
        } else {
            ((o - i as f64) / -d, 1.0 / -d)
        }
    };
    let (mut t_max_x, delta_x) = axis(dx, ox, ix);
    let (mut t_max_y, delta_y) = axis(dy, oy, iy);
    loop {
        let t = t_max_x.min(t_max_y);
        if t > range {
            break;
        }
        if (t_max_x - t_max_y).abs() < CORNER_EPS {
            let a = (ix + step_x, iy);
            let b = (ix, iy + step_y);
            let mut sides = [a, b];
            sides.sort_by_key(|&(x, y)| (y, x));
            for (x, y) in sides {
                if inside(x, y) {
                    out.push(Vertex::new(x as u32, y as u32));
                }
            }
            ix += step_x;
            iy += step_y;
            t_max_x += delta_x;
            t_max_y += delta_y;
        } else if t_max_x < t_max_y {
            ix += step_x;
            t_max_x += delta_x;
        } else {
            iy += step_y;
            t_max_y += delta_y;
        }
        if !inside(ix, iy) {
            break;
        }
        out.push(Vertex::new(ix as u32, iy as u32));
    }
    out
}

/// Precomputed per-ray cell sequences for one pose. Depends only on the
/// pose, the sensor and the grid size.
#[derive(Clone, Debug, PartialEq)]
pub struct RayFan {
    pub angles: Vec<f64>,
    pub cells: Vec<Vec<Vertex>>,
}

impl RayFan {
    pub fn new(pose: &Pose, sensor: &SensorModel, width: usize, height: usize) -> Self {
        let angles = sensor.angles(pose.theta);
        let cells = angles
            .iter()
            .map(|&a| cast_cells((pose.x, pose.y), a, sensor.range, width, height))
            .collect();
        RayFan { angles, cells }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RayReading {
    pub angle: f64,
    /// First occupied cell along the ray, if any lies within range.
    pub hit: Option<Vertex>,
    /// Free cells traversed before the hit (or up to range on a miss).
    pub free_cells: Vec<Vertex>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub node: usize,
    pub rays: Vec<RayReading>,
}

impl Measurement {
    pub fn from_fan(world: &GridWorld, node: usize, fan: &RayFan) -> Self {
        let rays = fan
            .angles
            .iter()
            .zip(&fan.cells)
            .map(|(&angle, cells)| {
                let mut free_cells = Vec::new();
                let mut hit = None;
                for &c in cells {
                    if world.is_occupied(c) {
                        hit = Some(c);
                        break;
                    }
                    free_cells.push(c);
                }
                RayReading {
                    angle,
                    hit,
                    free_cells,
                }
            })
            .collect();
        Measurement { node, rays }
    }

    /// Distinct hit cells, sorted by row-major order.
    pub fn hit_cells(&self) -> Vec<Vertex> {
        let mut hits: Vec<Vertex> = self.rays.iter().filter_map(|r| r.hit).collect();
        hits.sort_by_key(|v| (v.y, v.x));
        hits.dedup();
        hits
    }
}

/// Casts the sensor from `pose` into the true world.
pub fn raycast_measure(world: &GridWorld, node: usize, pose: &Pose, sensor: &SensorModel) -> Result<Measurement> {
    let c = pose.cell();
    if !world.contains(c.x as i64, c.y as i64) || world.is_occupied(c) {
        return Err(Error::contract(format!("sensor pose at {c} is not on a free cell")));
    }
    let fan = RayFan::new(pose, sensor, world.width(), world.height());
    Ok(Measurement::from_fan(world, node, &fan))
}
