use rand::Rng as _;
use rand_distr::{Distribution, Poisson};

use super::{Family, FamilyParams};
use crate::error::{Error, Result};
use crate::grid::{GridWorld, Vertex};
use crate::rng::Rng;

pub(super) fn generate(family: Family, p: &FamilyParams, rng: &mut Rng) -> Result<GridWorld> {
    match family {
        Family::GapWall => gap_wall(p, rng, None),
        Family::BiasedGapWall => gap_wall(p, rng, Some(p.bottom_bias)),
        Family::Bugtrap => bugtrap(p, rng),
        Family::Forest => forest(p, rng),
        Family::Maze => maze(p, rng),
        Family::ParallelLines => parallel_lines(p, rng),
        Family::DistributedBlocks => blocks(p, rng),
        Family::Mixed => {
            let pick = [Family::GapWall, Family::Bugtrap, Family::Forest, Family::Maze];
            generate(pick[rng.random_range(0..pick.len())], p, rng)
        }
    }
}

/// Single vertical wall through the middle column(s) with one gap.
/// With `bias = Some(b)` the gap lies in the bottom half with probability `b`.
fn gap_wall(p: &FamilyParams, rng: &mut Rng, bias: Option<f64>) -> Result<GridWorld> {
    let (w, h) = (p.width, p.height);
    let mut world = GridWorld::new(w, h)?;
    let x0 = (w - p.wall_thickness) / 2;
    let gap = p.gap_width;
    let top = match bias {
        None => rng.random_range(0..=h - gap),
        Some(b) => {
            let half = h / 2;
            if half < gap || h - half < gap {
                return Err(Error::Generation {
                    param: "gap_width".into(),
                    reason: "gap does not fit in half the wall".into(),
                });
            }
            if rng.random_bool(b) {
                rng.random_range(half..=h - gap)
            } else {
                rng.random_range(0..=half - gap)
            }
        }
    };
    for x in x0..x0 + p.wall_thickness {
        for y in 0..h {
            if y < top || y >= top + gap {
                world.set(Vertex::new(x as u32, y as u32), true);
            }
        }
    }
    Ok(world)
}

/// Square cup whose closed sides face the top-right goal corner; the mouth is
/// cut out of its bottom-left corner.
fn bugtrap(p: &FamilyParams, rng: &mut Rng) -> Result<GridWorld> {
    let (w, h) = (p.width as i64, p.height as i64);
    let mut world = GridWorld::new(p.width, p.height)?;
    let half = ((p.trap_size * w.min(h) as f64) / 2.0).floor() as i64;
    if half < 2 {
        return Err(Error::Generation {
            param: "trap_size".into(),
            reason: "trap smaller than 4 cells".into(),
        });
    }
    let j = p.trap_jitter as i64;
    let cx = w / 2 + rng.random_range(-j..=j);
    let cy = h / 2 + rng.random_range(-j..=j);
    let mouth = ((p.trap_mouth * half as f64).ceil() as i64).clamp(1, 2 * half - 1);
    let (x0, x1, y0, y1) = (cx - half, cx + half, cy - half, cy + half);
    for x in x0..=x1 {
        world.set_clipped(x, y0, true);
    }
    for y in y0..=y1 {
        world.set_clipped(x1, y, true);
    }
    for y in y0..=y1 - mouth {
        world.set_clipped(x0, y, true);
    }
    for x in x0 + mouth..=x1 {
        world.set_clipped(x, y1, true);
    }
    Ok(world)
}

/// Spatial Poisson process of discs. Centers are drawn over the map padded by
/// the radius on every side so that every cell sees the same coverage law,
/// `P(occupied) = 1 - exp(-density * pi * r^2)`.
fn forest(p: &FamilyParams, rng: &mut Rng) -> Result<GridWorld> {
    let mut world = GridWorld::new(p.width, p.height)?;
    let r = p.obstacle_radius;
    let (pw, ph) = (p.width as f64 + 2.0 * r, p.height as f64 + 2.0 * r);
    let mean = p.density * pw * ph;
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| Error::Generation {
                param: "density".into(),
                reason: e.to_string(),
            })?
            .sample(rng) as usize
    } else {
        0
    };
    for _ in 0..count {
        let cx = rng.random_range(0.0..pw) - r;
        let cy = rng.random_range(0.0..ph) - r;
        stamp_disc(&mut world, cx, cy, r);
    }
    Ok(world)
}

/// Occupies cells whose centers lie within `r` of `(cx, cy)`.
pub(crate) fn stamp_disc(world: &mut GridWorld, cx: f64, cy: f64, r: f64) {
    let xmin = (cx - r - 0.5).floor() as i64;
    let xmax = (cx + r - 0.5).ceil() as i64;
    let ymin = (cy - r - 0.5).floor() as i64;
    let ymax = (cy + r - 0.5).ceil() as i64;
    for y in ymin..=ymax {
        for x in xmin..=xmax {
            let dx = x as f64 + 0.5 - cx;
            let dy = y as f64 + 0.5 - cy;
            if dx * dx + dy * dy <= r * r {
                world.set_clipped(x, y, true);
            }
        }
    }
}

/// Recursive-backtracker maze with `corridor`-wide passages and one-cell
/// walls, plus random extra openings to create loops.
fn maze(p: &FamilyParams, rng: &mut Rng) -> Result<GridWorld> {
    let pitch = p.corridor + 1;
    let nx = (p.width.saturating_sub(1)) / pitch;
    let ny = (p.height.saturating_sub(1)) / pitch;
    if nx == 0 || ny == 0 {
        return Err(Error::Generation {
            param: "corridor".into(),
            reason: "corridor too wide for the map".into(),
        });
    }
    let mut world = GridWorld::from_cells(p.width, p.height, vec![true; p.width * p.height])?;
    let carve_block = |world: &mut GridWorld, x0: usize, y0: usize, wdt: usize, hgt: usize| {
        for y in y0..y0 + hgt {
            for x in x0..x0 + wdt {
                world.set_clipped(x as i64, y as i64, false);
            }
        }
    };
    let origin = |i: usize| 1 + i * pitch;
    for cy in 0..ny {
        for cx in 0..nx {
            carve_block(&mut world, origin(cx), origin(cy), p.corridor, p.corridor);
        }
    }
    let mut visited = vec![false; nx * ny];
    let mut stack = vec![(0usize, ny - 1)];
    visited[(ny - 1) * nx] = true;
    let open_between = |world: &mut GridWorld, a: (usize, usize), b: (usize, usize)| {
        if a.0 != b.0 {
            let x = origin(a.0.max(b.0)) - 1;
            carve_block(world, x, origin(a.1), 1, p.corridor);
        } else {
            let y = origin(a.1.max(b.1)) - 1;
            carve_block(world, origin(a.0), y, p.corridor, 1);
        }
    };
    while let Some(&(cx, cy)) = stack.last() {
        let mut options = Vec::with_capacity(4);
        if cx + 1 < nx && !visited[cy * nx + cx + 1] {
            options.push((cx + 1, cy));
        }
        if cx > 0 && !visited[cy * nx + cx - 1] {
            options.push((cx - 1, cy));
        }
        if cy + 1 < ny && !visited[(cy + 1) * nx + cx] {
            options.push((cx, cy + 1));
        }
        if cy > 0 && !visited[(cy - 1) * nx + cx] {
            options.push((cx, cy - 1));
        }
        if options.is_empty() {
            stack.pop();
            continue;
        }
        let next = options[rng.random_range(0..options.len())];
        open_between(&mut world, (cx, cy), next);
        visited[next.1 * nx + next.0] = true;
        stack.push(next);
    }
    for cy in 0..ny {
        for cx in 0..nx {
            if cx + 1 < nx && rng.random_bool(p.loop_prob) {
                open_between(&mut world, (cx, cy), (cx + 1, cy));
            }
            if cy + 1 < ny && rng.random_bool(p.loop_prob) {
                open_between(&mut world, (cx, cy), (cx, cy + 1));
            }
        }
    }
    Ok(world)
}

/// A band of parallel wall segments concentrated around a random offset.
/// Orientation (horizontal or vertical) is drawn per world.
fn parallel_lines(p: &FamilyParams, rng: &mut Rng) -> Result<GridWorld> {
    let mut world = GridWorld::new(p.width, p.height)?;
    let vertical = rng.random_bool(0.5);
    let (along, across) = if vertical { (p.height, p.width) } else { (p.width, p.height) };
    let spacing = p.line_spacing.max(1);
    let band = spacing * p.line_count.saturating_sub(1);
    if band >= across {
        return Err(Error::Generation {
            param: "line_count".into(),
            reason: "band of lines wider than the map".into(),
        });
    }
    let first = rng.random_range(0..across - band);
    let len = ((p.line_length * along as f64).round() as usize).clamp(1, along);
    for i in 0..p.line_count {
        let offset = first + i * spacing;
        let start = rng.random_range(0..=along - len);
        for s in start..start + len {
            let v = if vertical {
                Vertex::new(offset as u32, s as u32)
            } else {
                Vertex::new(s as u32, offset as u32)
            };
            world.set(v, true);
        }
    }
    Ok(world)
}

/// Axis-aligned rectangles scattered uniformly.
fn blocks(p: &FamilyParams, rng: &mut Rng) -> Result<GridWorld> {
    let mut world = GridWorld::new(p.width, p.height)?;
    let lo = (p.block_size / 2).max(1);
    let hi = (p.block_size * 3 / 2).max(lo);
    for _ in 0..p.block_count {
        let bw = rng.random_range(lo..=hi).min(p.width);
        let bh = rng.random_range(lo..=hi).min(p.height);
        let x0 = rng.random_range(0..=p.width - bw);
        let y0 = rng.random_range(0..=p.height - bh);
        for y in y0..y0 + bh {
            for x in x0..x0 + bw {
                world.set(Vertex::new(x as u32, y as u32), true);
            }
        }
    }
    Ok(world)
}
