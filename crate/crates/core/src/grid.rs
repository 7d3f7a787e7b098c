//! Binary occupancy grids and lattice vertices.
//!
//! Coordinates follow image convention: `x` is the column, `y` is the row and
//! the origin is the top-left cell.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[u32; 2]", into = "[u32; 2]")]
pub struct Vertex {
    pub x: u32,
    pub y: u32,
}

impl Vertex {
    pub const fn new(x: u32, y: u32) -> Self {
        Vertex { x, y }
    }

    pub fn euclidean(self, other: Vertex) -> f64 {
        let dx = self.x as f64 - other.x as f64;
        let dy = self.y as f64 - other.y as f64;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn manhattan(self, other: Vertex) -> f64 {
        (self.x.abs_diff(other.x) + self.y.abs_diff(other.y)) as f64
    }

    pub fn chebyshev(self, other: Vertex) -> f64 {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y)) as f64
    }

    pub fn is_neighbor(self, other: Vertex) -> bool {
        self != other && self.x.abs_diff(other.x) <= 1 && self.y.abs_diff(other.y) <= 1
    }
}

impl From<[u32; 2]> for Vertex {
    fn from([x, y]: [u32; 2]) -> Self {
        Vertex { x, y }
    }
}

impl From<Vertex> for [u32; 2] {
    fn from(v: Vertex) -> Self {
        [v.x, v.y]
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Successor offsets in enumeration order E, NE, N, NW, W, SW, S, SE.
/// North is `y - 1`.
pub const NEIGHBOR_OFFSETS: [(i32, i32); 8] = [
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridWorld {
    width: usize,
    height: usize,
    /// Row-major, `true` = occupied.
    cells: Vec<bool>,
}

impl fmt::Debug for GridWorld {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "GridWorld {}x{}", self.width, self.height)?;
        for y in 0..self.height {
            let row: String = (0..self.width)
                .map(|x| if self.cells[y * self.width + x] { '#' } else { '.' })
                .collect();
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

impl GridWorld {
    /// All-free grid.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        Self::from_cells(width, height, vec![false; width * height])
    }

    pub fn from_cells(width: usize, height: usize, cells: Vec<bool>) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::contract(format!(
                "grid must be at least 2x2, got {width}x{height}"
            )));
        }
        if cells.len() != width * height {
            return Err(Error::contract(format!(
                "cell count {} does not match {width}x{height}",
                cells.len()
            )));
        }
        Ok(GridWorld {
            width,
            height,
            cells,
        })
    }

    /// Parses rows of `#` (occupied) and `.` (free). Handy for tests.
    pub fn from_ascii(rows: &[&str]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut cells = Vec::with_capacity(width * height);
        for row in rows {
            if row.len() != width {
                return Err(Error::format("ascii grid", "ragged rows"));
            }
            cells.extend(row.chars().map(|c| c == '#'));
        }
        Self::from_cells(width, height, cells)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn index(&self, v: Vertex) -> usize {
        v.y as usize * self.width + v.x as usize
    }

    pub fn vertex(&self, index: usize) -> Vertex {
        Vertex::new((index % self.width) as u32, (index / self.width) as u32)
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    pub fn is_occupied(&self, v: Vertex) -> bool {
        self.cells[self.index(v)]
    }

    pub fn is_free(&self, v: Vertex) -> bool {
        !self.is_occupied(v)
    }

    pub fn set(&mut self, v: Vertex, occupied: bool) {
        let i = self.index(v);
        self.cells[i] = occupied;
    }

    /// Sets a cell given signed coordinates; out-of-bounds writes are ignored.
    pub fn set_clipped(&mut self, x: i64, y: i64, occupied: bool) {
        if self.contains(x, y) {
            self.cells[y as usize * self.width + x as usize] = occupied;
        }
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn free_count(&self) -> usize {
        self.len() - self.occupied_count()
    }

    /// In-bounds 8-neighbors in fixed E, NE, N, NW, W, SW, S, SE order.
    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        NEIGHBOR_OFFSETS.iter().filter_map(move |&(dx, dy)| {
            let x = v.x as i64 + dx as i64;
            let y = v.y as i64 + dy as i64;
            self.contains(x, y).then(|| Vertex::new(x as u32, y as u32))
        })
    }

    /// Integrity token: first 16 hex digits of the SHA-256 of dimensions and cells.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.width as u64).to_le_bytes());
        h.update((self.height as u64).to_le_bytes());
        let bytes: Vec<u8> = self.cells.iter().map(|&c| c as u8).collect();
        h.update(&bytes);
        let out = h.finalize();
        out[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Free cell nearest (Euclidean, ties by row-major index) to a target point.
    pub fn nearest_free(&self, x: f64, y: f64) -> Option<Vertex> {
        let mut best: Option<(f64, usize)> = None;
        for (i, &occ) in self.cells.iter().enumerate() {
            if occ {
                continue;
            }
            let v = self.vertex(i);
            let d = (v.x as f64 - x).powi(2) + (v.y as f64 - y).powi(2);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, i));
            }
        }
        best.map(|(_, i)| self.vertex(i))
    }

    /// Breadth-first hop distances from `source` over free cells; `u32::MAX`
    /// marks unreachable or occupied cells.
    pub fn bfs_distances(&self, source: Vertex) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.len()];
        if self.is_occupied(source) {
            return dist;
        }
        let mut queue = VecDeque::new();
        dist[self.index(source)] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            let d = dist[self.index(v)];
            for u in self.neighbors(v) {
                let i = self.index(u);
                if !self.cells[i] && dist[i] == u32::MAX {
                    dist[i] = d + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    pub fn connected(&self, a: Vertex, b: Vertex) -> bool {
        self.bfs_distances(a)[self.index(b)] != u32::MAX
    }
}
