//! Occupancy grids: ASCII loading, exact Euclidean distance field and DDA raycasting.
//!
//! Document rows are stored top-down: row 0 is the maximum-y row. The header
//! `origin` is the world pose of the lower-left corner of the grid, i.e. the
//! outer corner of the bottom-left cell.

use crate::geometry::{Pose, Position2D};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellState {
    Free,
    Occupied,
    Unknown,
}

impl CellState {
    /// Occupied and unknown cells both stop rays and count as obstacles.
    pub fn blocks(self) -> bool {
        !matches!(self, CellState::Free)
    }

    fn symbol(self) -> char {
        match self {
            CellState::Free => '.',
            CellState::Occupied => '#',
            CellState::Unknown => '?',
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("map parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid pose ({x:.3}, {y:.3}): {reason}")]
    InvalidPose { x: f64, y: f64, reason: &'static str },
    #[error("map has no free cells")]
    NoFreeCells,
}

/// Column/row index into the grid; row 0 is the top (maximum-y) row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub col: usize,
    pub row: usize,
}

impl Cell {
    pub const fn new(col: usize, row: usize) -> Self {
        Self { col, row }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    resolution: f64,
    origin: Pose,
    cells: Vec<CellState>,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize, resolution: f64, origin: Pose, cells: Vec<CellState>) -> Self {
        assert!(width >= 1 && height >= 1, "grid must have at least one cell");
        assert!(resolution > 0.0, "resolution must be positive");
        assert_eq!(cells.len(), width * height);
        Self {
            width,
            height,
            resolution,
            origin,
            cells,
        }
    }

    /// An all-free grid.
    pub fn empty(width: usize, height: usize, resolution: f64, origin: Pose) -> Self {
        Self::new(width, height, resolution, origin, vec![CellState::Free; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> Pose {
        self.origin
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn get(&self, cell: Cell) -> CellState {
        self.cells[cell.row * self.width + cell.col]
    }

    pub fn set(&mut self, cell: Cell, state: CellState) {
        self.cells[cell.row * self.width + cell.col] = state;
    }

    pub fn count(&self, state: CellState) -> usize {
        self.cells.iter().filter(|&&c| c == state).count()
    }

    pub fn free_cells(&self) -> Vec<Cell> {
        (0..self.height)
            .flat_map(|row| (0..self.width).map(move |col| Cell::new(col, row)))
            .filter(|&c| self.get(c) == CellState::Free)
            .collect()
    }

    /// Width and height of the grid in meters.
    pub fn extent(&self) -> (f64, f64) {
        (
            self.width as f64 * self.resolution,
            self.height as f64 * self.resolution,
        )
    }

    /// Continuous grid-frame coordinates (in cells) of a world point; `(0, 0)` is the
    /// lower-left corner and `v` grows upward.
    pub fn world_to_grid(&self, p: &Position2D) -> (f64, f64) {
        let (s, c) = self.origin.theta.sin_cos();
        let dx = p.x - self.origin.x;
        let dy = p.y - self.origin.y;
        (
            (c * dx + s * dy) / self.resolution,
            (-s * dx + c * dy) / self.resolution,
        )
    }

    pub fn grid_to_world(&self, u: f64, v: f64) -> Position2D {
        let (s, c) = self.origin.theta.sin_cos();
        let gx = u * self.resolution;
        let gy = v * self.resolution;
        Position2D::new(self.origin.x + c * gx - s * gy, self.origin.y + s * gx + c * gy)
    }

    pub fn world_to_cell(&self, p: &Position2D) -> Option<Cell> {
        let (u, v) = self.world_to_grid(p);
        if u < 0.0 || v < 0.0 {
            return None;
        }
        let (col, from_bottom) = (u.floor() as usize, v.floor() as usize);
        if col >= self.width || from_bottom >= self.height {
            return None;
        }
        Some(Cell::new(col, self.height - 1 - from_bottom))
    }

    pub fn cell_center(&self, cell: Cell) -> Position2D {
        let v = (self.height - 1 - cell.row) as f64 + 0.5;
        self.grid_to_world(cell.col as f64 + 0.5, v)
    }

    /// State at a world point; everything outside the grid reads as unknown.
    pub fn state_at(&self, p: &Position2D) -> CellState {
        self.world_to_cell(p).map_or(CellState::Unknown, |c| self.get(c))
    }

    pub fn is_free(&self, p: &Position2D) -> bool {
        self.state_at(p) == CellState::Free
    }

    /// Parses the ASCII map document format.
    pub fn parse(text: &str) -> Result<Self, MapError> {
        let err = |line: usize, column: usize, message: String| MapError::Parse { line, column, message };
        let mut resolution = None;
        let mut origin = None;
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));

        // header up to the first blank line
        let mut saw_blank = false;
        for (ln, line) in lines.by_ref() {
            let trimmed = line.trim();
            if trimmed.is_empty() {
                saw_blank = true;
                break;
            }
            let (key, value) = trimmed
                .split_once(':')
                .ok_or_else(|| err(ln, 1, format!("expected `key: value` header, got {trimmed:?}")))?;
            let value_col = line.find(':').unwrap_or(0) + 2;
            match key.trim() {
                "resolution" => {
                    let r: f64 = value
                        .trim()
                        .parse()
                        .map_err(|_| err(ln, value_col, format!("bad resolution {:?}", value.trim())))?;
                    if !(r.is_finite() && r > 0.0) {
                        return Err(err(ln, value_col, "resolution must be positive".into()));
                    }
                    resolution = Some(r);
                }
                "origin" => {
                    let parts: Vec<&str> = value.split_whitespace().collect();
                    if parts.len() != 3 {
                        return Err(err(ln, value_col, "origin needs `x y theta`".into()));
                    }
                    let mut vals = [0.0; 3];
                    for (slot, part) in vals.iter_mut().zip(&parts) {
                        *slot = part
                            .parse()
                            .ok()
                            .filter(|v: &f64| v.is_finite())
                            .ok_or_else(|| err(ln, value_col, format!("bad origin component {part:?}")))?;
                    }
                    origin = Some(Pose::new(vals[0], vals[1], vals[2]));
                }
                other => return Err(err(ln, 1, format!("unknown header key {other:?}"))),
            }
        }
        if !saw_blank {
            return Err(err(
                text.lines().count().max(1),
                1,
                "missing blank line after header".into(),
            ));
        }
        let resolution = resolution.ok_or_else(|| err(1, 1, "missing `resolution` header".into()))?;
        let origin = origin.ok_or_else(|| err(1, 1, "missing `origin` header".into()))?;

        let mut width = None;
        let mut cells = Vec::new();
        let mut height = 0;
        let mut trailing_blank: Option<usize> = None;
        for (ln, line) in lines {
            if line.trim().is_empty() {
                trailing_blank.get_or_insert(ln);
                continue;
            }
            if let Some(blank) = trailing_blank {
                return Err(err(blank, 1, "blank line inside grid".into()));
            }
            let row: Vec<char> = line.chars().collect();
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => {
                    return Err(err(
                        ln,
                        row.len().min(w) + 1,
                        format!("row has {} cells, expected {w}", row.len()),
                    ))
                }
                _ => {}
            }
            for (col, ch) in row.iter().enumerate() {
                cells.push(match ch {
                    '.' => CellState::Free,
                    '#' => CellState::Occupied,
                    '?' => CellState::Unknown,
                    other => return Err(err(ln, col + 1, format!("unknown cell character {other:?}"))),
                });
            }
            height += 1;
        }
        let width = width.ok_or_else(|| err(text.lines().count().max(1), 1, "map has no rows".into()))?;
        Ok(Self::new(width, height, resolution, origin, cells))
    }

    /// Serializes back to the ASCII document format.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.cells.len() + self.height + 64);
        let _ = writeln!(out, "resolution: {}", self.resolution);
        let _ = writeln!(out, "origin: {} {} {}", self.origin.x, self.origin.y, self.origin.theta);
        out.push('\n');
        for row in self.cells.chunks(self.width) {
            out.extend(row.iter().map(|c| c.symbol()));
            out.push('\n');
        }
        out
    }

    /// Distance along a ray to the first blocking cell boundary, clamped to `r_max`.
    ///
    /// The ray starts at `origin`'s position and points along `origin.theta + bearing`.
    /// Leaving the grid counts as a hit at the grid boundary.
    pub fn raycast(&self, origin: &Pose, bearing: f64, r_max: f64) -> Result<f64, MapError> {
        let start = origin.position();
        let Some(cell) = self.world_to_cell(&start) else {
            return Err(MapError::InvalidPose {
                x: start.x,
                y: start.y,
                reason: "outside the map",
            });
        };
        if self.get(cell).blocks() {
            return Err(MapError::InvalidPose {
                x: start.x,
                y: start.y,
                reason: "inside an obstacle",
            });
        }
        Ok(self.raycast_from(start, origin.theta + bearing, r_max))
    }

    /// DDA traversal without the start-cell validation.
    pub(crate) fn raycast_from(&self, start: Position2D, world_angle: f64, r_max: f64) -> f64 {
        let (u0, v0) = self.world_to_grid(&start);
        let angle = world_angle - self.origin.theta;
        let (dv, du) = angle.sin_cos();
        let res = self.resolution;
        let (w, h) = (self.width as i64, self.height as i64);

        let mut cu = u0.floor() as i64;
        let mut cv = v0.floor() as i64;
        let step_u: i64 = if du > 0.0 { 1 } else { -1 };
        let step_v: i64 = if dv > 0.0 { 1 } else { -1 };
        // parametric distance (in cells) to the next vertical / horizontal boundary
        let mut t_max_u = if du > 0.0 {
            (cu as f64 + 1.0 - u0) / du
        } else if du < 0.0 {
            (u0 - cu as f64) / -du
        } else {
            f64::INFINITY
        };
        let mut t_max_v = if dv > 0.0 {
            (cv as f64 + 1.0 - v0) / dv
        } else if dv < 0.0 {
            (v0 - cv as f64) / -dv
        } else {
            f64::INFINITY
        };
        let t_delta_u = if du != 0.0 { 1.0 / du.abs() } else { f64::INFINITY };
        let t_delta_v = if dv != 0.0 { 1.0 / dv.abs() } else { f64::INFINITY };
        let t_limit = r_max / res;

        loop {
            let t = if t_max_u < t_max_v {
                cu += step_u;
                let t = t_max_u;
                t_max_u += t_delta_u;
                t
            } else {
                cv += step_v;
                let t = t_max_v;
                t_max_v += t_delta_v;
                t
            };
            if t >= t_limit {
                return r_max;
            }
            if cu < 0 || cv < 0 || cu >= w || cv >= h {
                return t * res;
            }
            let cell = Cell::new(cu as usize, (h - 1 - cv) as usize);
            if self.get(cell).blocks() {
                return t * res;
            }
        }
    }
}

/// Per-cell Euclidean distance (meters) to the nearest blocking cell center.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceField {
    width: usize,
    height: usize,
    resolution: f64,
    origin: Pose,
    origin_sin: f64,
    origin_cos: f64,
    cap: f64,
    values: Vec<f64>,
}

impl DistanceField {
    /// Exact Euclidean distance transform (two separable passes over squared distances).
    pub fn new(grid: &OccupancyGrid) -> Self {
        let (w, h) = (grid.width, grid.height);
        let cap = (w as f64 + h as f64) * grid.resolution;
        let (origin_sin, origin_cos) = grid.origin.theta.sin_cos();
        let blocking = grid.cells.iter().filter(|c| c.blocks()).count();
        if blocking == 0 {
            return Self {
                width: w,
                height: h,
                resolution: grid.resolution,
                origin: grid.origin,
                origin_sin,
                origin_cos,
                cap,
                values: vec![cap; w * h],
            };
        }
        let inf = f64::INFINITY;
        // column pass
        let mut sq = vec![inf; w * h];
        let mut col_in = vec![0.0; h];
        let mut col_out = vec![0.0; h];
        for col in 0..w {
            for (row, v) in col_in.iter_mut().enumerate() {
                *v = if grid.cells[row * w + col].blocks() { 0.0 } else { inf };
            }
            edt_1d(&col_in, &mut col_out);
            for row in 0..h {
                sq[row * w + col] = col_out[row];
            }
        }
        // row pass
        let mut row_out = vec![0.0; w];
        let mut values = vec![0.0; w * h];
        for row in 0..h {
            edt_1d(&sq[row * w..(row + 1) * w], &mut row_out);
            for col in 0..w {
                values[row * w + col] = row_out[col].sqrt() * grid.resolution;
            }
        }
        Self {
            width: w,
            height: h,
            resolution: grid.resolution,
            origin: grid.origin,
            origin_sin,
            origin_cos,
            cap,
            values,
        }
    }

    /// Value used for all-free maps and for lookups outside the grid.
    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn at_cell(&self, cell: Cell) -> f64 {
        self.values[cell.row * self.width + cell.col]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Distance at a world point (nearest-cell lookup); the cap outside the grid.
    #[inline]
    pub fn at(&self, x: f64, y: f64) -> f64 {
        let (s, c) = (self.origin_sin, self.origin_cos);
        let dx = x - self.origin.x;
        let dy = y - self.origin.y;
        let u = (c * dx + s * dy) / self.resolution;
        let v = (-s * dx + c * dy) / self.resolution;
        if !(u >= 0.0 && v >= 0.0) {
            return self.cap;
        }
        let (col, from_bottom) = (u as usize, v as usize);
        if col >= self.width || from_bottom >= self.height {
            return self.cap;
        }
        self.values[(self.height - 1 - from_bottom) * self.width + col]
    }
}

/// 1-D squared distance transform of a sampled function (lower envelope of parabolas).
fn edt_1d(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    let first = match f.iter().position(|x| x.is_finite()) {
        Some(i) => i,
        None => {
            out.iter_mut().for_each(|o| *o = f64::INFINITY);
            return;
        }
    };
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in first + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * q as f64 - 2.0 * p as f64);
            if s <= z[k] {
                // k > 0 is guaranteed here: z[0] is -inf
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(rows: &[&str], res: f64) -> String {
        format!("resolution: {res}\norigin: 0 0 0\n\n{}\n", rows.join("\n"))
    }

    #[test]
    fn parses_all_free() {
        let g = OccupancyGrid::parse(&doc(&["...", "...", "..."], 1.0)).unwrap();
        assert_eq!((g.width(), g.height()), (3, 3));
        assert_eq!(g.count(CellState::Free), 9);
    }

    #[test]
    fn parses_single_obstacle() {
        let g = OccupancyGrid::parse(&doc(&["..#", "...", "..."], 1.0)).unwrap();
        assert_eq!(g.count(CellState::Occupied), 1);
        assert_eq!(g.get(Cell::new(2, 0)), CellState::Occupied);
        // row 0 is the top row
        let c = g.cell_center(Cell::new(2, 0));
        assert_eq!((c.x, c.y), (2.5, 2.5));
    }

    #[test]
    fn ragged_rows_report_line() {
        // header (2 lines) + blank, so grid row 2 is document line 5
        let e = OccupancyGrid::parse(&doc(&["...", "...."], 1.0)).unwrap_err();
        match e {
            MapError::Parse { line, .. } => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_character_reports_column() {
        let e = OccupancyGrid::parse(&doc(&["..x"], 1.0)).unwrap_err();
        assert_eq!(
            e,
            MapError::Parse {
                line: 4,
                column: 3,
                message: "unknown cell character 'x'".into()
            }
        );
    }

    #[test]
    fn malformed_header() {
        assert!(OccupancyGrid::parse("resolution: -1\norigin: 0 0 0\n\n...\n").is_err());
        assert!(OccupancyGrid::parse("origin: 0 0\nresolution: 1\n\n...\n").is_err());
        assert!(OccupancyGrid::parse("resolution: 1\n\n...\n").is_err());
    }

    #[test]
    fn text_round_trip() {
        let text = doc(&["#.?", "..."], 0.25);
        let g = OccupancyGrid::parse(&text).unwrap();
        assert_eq!(OccupancyGrid::parse(&g.to_text()).unwrap(), g);
    }

    #[test]
    fn world_cell_round_trip_with_rotated_origin() {
        let g = OccupancyGrid::empty(20, 10, 0.1, Pose::new(1.0, -2.0, 0.3));
        for row in 0..10 {
            for col in 0..20 {
                let c = Cell::new(col, row);
                assert_eq!(g.world_to_cell(&g.cell_center(c)), Some(c));
            }
        }
    }

    #[test]
    fn distance_field_on_single_row() {
        let g = OccupancyGrid::parse(&doc(&["#...."], 0.5)).unwrap();
        let df = DistanceField::new(&g);
        assert_eq!(df.values(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn distance_field_all_free_is_cap() {
        let g = OccupancyGrid::empty(4, 3, 0.5, Pose::default());
        let df = DistanceField::new(&g);
        assert!(df.values().iter().all(|&v| v == 3.5));
        assert_eq!(df.at(-1.0, 0.0), 3.5);
    }

    #[test]
    fn raycast_clamps_in_long_corridor() {
        let g = OccupancyGrid::empty(400, 3, 0.05, Pose::default());
        let r = g.raycast(&Pose::new(0.5, 0.075, 0.0), 0.0, 12.0).unwrap();
        assert_eq!(r, 12.0);
    }

    #[test]
    fn raycast_rejects_pose_in_obstacle() {
        let g = OccupancyGrid::parse(&doc(&["#.."], 1.0)).unwrap();
        assert!(matches!(
            g.raycast(&Pose::new(0.5, 0.5, 0.0), 0.0, 5.0),
            Err(MapError::InvalidPose { .. })
        ));
    }

    #[test]
    fn unknown_blocks_rays() {
        let g = OccupancyGrid::parse(&doc(&["..?.."], 1.0)).unwrap();
        let r = g.raycast(&Pose::new(0.5, 0.5, 0.0), 0.0, 10.0).unwrap();
        assert!((r - 1.5).abs() < 1e-12);
    }
}
