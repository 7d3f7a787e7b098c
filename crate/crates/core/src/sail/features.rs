//! Search-state features for open vertices.
//!
//! Layout (17 values): `x_v, y_v, x_g, y_g, g, h_euc, h_man, d_tree`, then
//! `(x, y, d)` of the nearest known obstacle overall, nearest by x and nearest
//! by y. Coordinates are divided by `(W-1, H-1)`, lengths by the diagonal.

use crate::error::{Error, Result};
use crate::grid::Vertex;
use crate::learn::{FeatureVector, Schema};
use crate::search::{SearchContext, SearchFrontier};

pub const SEARCH_FEATURES: usize = 17;

/// Value of every obstacle feature while no obstacle is known.
pub const NO_OBSTACLE: f64 = 1.0;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Scale {
    sx: f64,
    sy: f64,
    diag: f64,
}

impl Scale {
    pub fn new(width: usize, height: usize) -> Self {
        let sx = (width.max(2) - 1) as f64;
        let sy = (height.max(2) - 1) as f64;
        Scale {
            sx,
            sy,
            diag: (sx * sx + sy * sy).sqrt(),
        }
    }
}

pub(crate) fn write_features(v: Vertex, frontier: &SearchFrontier, ctx: &SearchContext<'_>, out: &mut [f64; SEARCH_FEATURES]) {
    let s = Scale::new(ctx.width(), ctx.height());
    let g = ctx.goal;
    out[0] = v.x as f64 / s.sx;
    out[1] = v.y as f64 / s.sy;
    out[2] = g.x as f64 / s.sx;
    out[3] = g.y as f64 / s.sy;
    out[4] = frontier.g(v) as f64 / s.diag;
    out[5] = v.euclidean(g) / s.diag;
    out[6] = v.manhattan(g) / s.diag;
    out[7] = frontier.depth(v) as f64 / s.diag;
    let obstacles = frontier.obstacles();
    if obstacles.is_empty() {
        out[8..].fill(NO_OBSTACLE);
        return;
    }
    // (primary key, euclidean distance, obstacle) per criterion; first found wins ties.
    let mut best = [(f64::INFINITY, f64::INFINITY, obstacles[0]); 3];
    for &o in obstacles {
        let d = v.euclidean(o);
        let keys = [d, (o.x as f64 - v.x as f64).abs(), (o.y as f64 - v.y as f64).abs()];
        for (b, k) in best.iter_mut().zip(keys) {
            if (k, d) < (b.0, b.1) {
                *b = (k, d, o);
            }
        }
    }
    for (i, (_, d, o)) in best.into_iter().enumerate() {
        out[8 + 3 * i] = o.x as f64 / s.sx;
        out[9 + 3 * i] = o.y as f64 / s.sy;
        out[10 + 3 * i] = d / s.diag;
    }
}

/// Features of open vertex `v`; errors if `v` is not open.
pub fn extract_search_features(v: Vertex, frontier: &SearchFrontier, ctx: &SearchContext<'_>) -> Result<FeatureVector> {
    if v.x as usize >= ctx.width() || v.y as usize >= ctx.height() || !frontier.is_open(v) {
        return Err(Error::contract(format!("{v} is not in the open list")));
    }
    let mut out = [0.0; SEARCH_FEATURES];
    write_features(v, frontier, ctx, &mut out);
    FeatureVector::new(Schema::Search, out.to_vec())
}
