use super::SimError;
use crate::geometry::{Pose, Position2D};
use crate::map::{Cell, DistanceField, OccupancyGrid};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Grid planner over cells whose center keeps at least one robot radius of
/// clearance from every blocking cell.
#[derive(Debug, Clone)]
pub struct Planner {
    grid: OccupancyGrid,
    /// Row-major; `true` where the robot center may go.
    passable: Vec<bool>,
}

#[derive(Clone, Copy, PartialEq)]
struct Open {
    f: f64,
    g: f64,
    idx: usize,
}

impl Eq for Open {}

impl Ord for Open {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on f, then prefer larger g, then index for determinism
        other
            .f
            .total_cmp(&self.f)
            .then(self.g.total_cmp(&other.g))
            .then(other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Planner {
    pub fn new(grid: &OccupancyGrid, robot_radius: f64) -> Self {
        let df = DistanceField::new(grid);
        // distance is measured to obstacle cell centers; half a cell covers the
        // obstacle's own extent
        let clearance = robot_radius + 0.5 * grid.resolution();
        let passable = df
            .values()
            .iter()
            .zip(grid.cells())
            .map(|(&d, c)| !c.blocks() && d >= clearance)
            .collect();
        Self {
            grid: grid.clone(),
            passable,
        }
    }

    pub fn grid(&self) -> &OccupancyGrid {
        &self.grid
    }

    pub fn is_passable_cell(&self, c: Cell) -> bool {
        self.passable[c.row * self.grid.width() + c.col]
    }

    pub fn is_passable(&self, p: &Position2D) -> bool {
        self.grid.world_to_cell(p).is_some_and(|c| self.is_passable_cell(c))
    }

    pub fn passable_cells(&self) -> Vec<Cell> {
        let w = self.grid.width();
        self.passable
            .iter()
            .enumerate()
            .filter(|(_, p)| **p)
            .map(|(i, _)| Cell::new(i % w, i / w))
            .collect()
    }

    /// Whether the straight segment stays on passable cells (sampled at a
    /// quarter cell).
    pub fn line_of_sight(&self, a: &Position2D, b: &Position2D) -> bool {
        let len = a.distance(b);
        let steps = (len / (0.25 * self.grid.resolution())).ceil().max(1.0) as usize;
        (0..=steps).all(|i| {
            let t = i as f64 / steps as f64;
            self.is_passable(&Position2D::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)))
        })
    }

    /// 8-connected A* from `start` to `goal`, simplified to line-of-sight waypoints.
    /// The first waypoint is the start position and the last the goal position.
    pub fn plan(&self, start: &Pose, goal: &Pose) -> Result<Vec<Position2D>, SimError> {
        let (s, g) = (start.position(), goal.position());
        let cs = self.grid.world_to_cell(&s).filter(|c| self.is_passable_cell(*c));
        let cg = self.grid.world_to_cell(&g).filter(|c| self.is_passable_cell(*c));
        let (Some(cs), Some(cg)) = (cs, cg) else {
            return Err(SimError::Unreachable {
                from: s,
                to: g,
                reason: "endpoint is not on a free cell with clearance",
            });
        };
        if cs == cg {
            return Ok(if s == g { vec![s] } else { vec![s, g] });
        }
        let cells = self.astar(cs, cg).ok_or(SimError::Unreachable {
            from: s,
            to: g,
            reason: "no path",
        })?;
        let mut pts: Vec<Position2D> = cells.iter().map(|c| self.grid.cell_center(*c)).collect();
        pts[0] = s;
        *pts.last_mut().expect("path has two cells or more") = g;
        Ok(self.simplify(&pts))
    }

    fn astar(&self, start: Cell, goal: Cell) -> Option<Vec<Cell>> {
        let (w, h) = (self.grid.width() as i64, self.grid.height() as i64);
        let idx = |c: Cell| c.row * w as usize + c.col;
        let heuristic = |c: Cell| {
            let dx = (c.col as f64 - goal.col as f64).abs();
            let dy = (c.row as f64 - goal.row as f64).abs();
            dx.max(dy) + (std::f64::consts::SQRT_2 - 1.0) * dx.min(dy)
        };
        let n = (w * h) as usize;
        let mut g = vec![f64::INFINITY; n];
        let mut parent = vec![usize::MAX; n];
        let mut closed = vec![false; n];
        let mut heap = BinaryHeap::new();
        g[idx(start)] = 0.0;
        heap.push(Open {
            f: heuristic(start),
            g: 0.0,
            idx: idx(start),
        });
        while let Some(Open { g: gc, idx: i, .. }) = heap.pop() {
            if closed[i] {
                continue;
            }
            closed[i] = true;
            if i == idx(goal) {
                let mut out = vec![goal];
                let mut k = i;
                while parent[k] != usize::MAX {
                    k = parent[k];
                    out.push(Cell::new(k % w as usize, k / w as usize));
                }
                out.reverse();
                return Some(out);
            }
            let (col, row) = ((i % w as usize) as i64, (i / w as usize) as i64);
            for (dc, dr) in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let (nc, nr) = (col + dc, row + dr);
                if nc < 0 || nr < 0 || nc >= w || nr >= h {
                    continue;
                }
                let next = Cell::new(nc as usize, nr as usize);
                if !self.is_passable_cell(next) {
                    continue;
                }
                let diagonal = dc != 0 && dr != 0;
                // no corner cutting
                if diagonal
                    && !(self.is_passable_cell(Cell::new(nc as usize, row as usize))
                        && self.is_passable_cell(Cell::new(col as usize, nr as usize)))
                {
                    continue;
                }
                let j = idx(next);
                let cost = gc + if diagonal { std::f64::consts::SQRT_2 } else { 1.0 };
                if cost < g[j] {
                    g[j] = cost;
                    parent[j] = i;
                    heap.push(Open {
                        f: cost + heuristic(next),
                        g: cost,
                        idx: j,
                    });
                }
            }
        }
        None
    }

    /// Keeps only the points needed so consecutive waypoints see each other.
    fn simplify(&self, pts: &[Position2D]) -> Vec<Position2D> {
        let mut out = vec![pts[0]];
        let mut anchor = 0;
        while anchor + 1 < pts.len() {
            let mut next = anchor + 1;
            for k in (anchor + 2..pts.len()).rev() {
                if self.line_of_sight(&pts[anchor], &pts[k]) {
                    next = k;
                    break;
                }
            }
            out.push(pts[next]);
            anchor = next;
        }
        out
    }
}

/// Total length of a waypoint polyline.
pub fn path_length(path: &[Position2D]) -> f64 {
    path.windows(2).map(|w| w[0].distance(&w[1])).sum()
}

/// One-shot planning with a fresh [`Planner`].
pub fn plan_path(
    grid: &OccupancyGrid,
    start: &Pose,
    goal: &Pose,
    robot_radius: f64,
) -> Result<Vec<Position2D>, SimError> {
    Planner::new(grid, robot_radius).plan(start, goal)
}
