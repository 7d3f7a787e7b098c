//! Search wavefront frames as binary PPM (P6) images.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{GridWorld, Vertex};
use crate::search::TraceStep;

pub type Rgb = [u8; 3];

pub const UNEXPANDED: Rgb = [255, 255, 255];
pub const EXPANDED: Rgb = [0, 0, 255];
pub const INVALID: Rgb = [0, 0, 0];
pub const START: Rgb = [0, 200, 0];
pub const GOAL: Rgb = [255, 0, 0];
pub const PATH: Rgb = [0, 200, 0];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    /// Row-major RGB triples, one per cell.
    pub pixels: Vec<Rgb>,
}

impl Frame {
    fn filled(width: usize, height: usize, c: Rgb) -> Self {
        Frame {
            width,
            height,
            pixels: vec![c; width * height],
        }
    }

    pub fn pixel(&self, v: Vertex) -> Rgb {
        self.pixels[v.y as usize * self.width + v.x as usize]
    }

    fn set(&mut self, v: Vertex, c: Rgb) {
        self.pixels[v.y as usize * self.width + v.x as usize] = c;
    }

    /// P6 encoding with each cell drawn as a `scale`-by-`scale` block.
    pub fn to_ppm(&self, scale: usize) -> Vec<u8> {
        let s = scale.max(1);
        let (w, h) = (self.width * s, self.height * s);
        let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
        out.reserve(w * h * 3);
        for y in 0..h {
            for x in 0..w {
                out.extend_from_slice(&self.pixels[(y / s) * self.width + x / s]);
            }
        }
        out
    }
}

/// One frame before the first expansion and one after each expansion. The
/// last frame carries the path overlay when a path is given.
pub fn frames(world: &GridWorld, start: Vertex, goal: Vertex, trace: &[TraceStep], path: Option<&[Vertex]>) -> Vec<Frame> {
    let mut canvas = Frame::filled(world.width(), world.height(), UNEXPANDED);
    let mark = |f: &Frame| {
        let mut f = f.clone();
        f.set(start, START);
        f.set(goal, GOAL);
        f
    };
    let mut out = Vec::with_capacity(trace.len() + 1);
    out.push(mark(&canvas));
    for step in trace {
        canvas.set(step.expanded, EXPANDED);
        for &o in &step.new_obstacles {
            canvas.set(o, INVALID);
        }
        out.push(mark(&canvas));
    }
    if let (Some(path), Some(last)) = (path, out.last_mut()) {
        for &v in path {
            last.set(v, PATH);
        }
        last.set(start, START);
        last.set(goal, GOAL);
    }
    out
}

/// Writes `frame_00000.ppm`, `frame_00001.ppm`, ... into `dir`.
pub fn render_frames(
    world: &GridWorld,
    start: Vertex,
    goal: Vertex,
    trace: &[TraceStep],
    path: Option<&[Vertex]>,
    dir: &Path,
    scale: usize,
) -> Result<usize> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let fs_ = frames(world, start, goal, trace, path);
    for (i, f) in fs_.iter().enumerate() {
        let p = dir.join(format!("frame_{i:05}.ppm"));
        fs::write(&p, f.to_ppm(scale)).map_err(|e| Error::io(&p, e))?;
    }
    Ok(fs_.len())
}
