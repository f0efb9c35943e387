use super::{CompressError, CompressionConfig, PositionSamples};
use crate::geometry::Position2D;
use serde::{Deserialize, Serialize};

/// Axis-aligned box `[xmin, xmax] × [ymin, ymax]` in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl BBox {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64) -> Self {
        Self { xmin, xmax, ymin, ymax }
    }

    pub fn area(&self) -> f64 {
        (self.xmax - self.xmin) * (self.ymax - self.ymin)
    }

    pub fn contains(&self, p: &Position2D) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    /// `(min, max)` along `dim` (0 = x, 1 = y).
    pub fn span(&self, dim: u8) -> (f64, f64) {
        if dim == 0 {
            (self.xmin, self.xmax)
        } else {
            (self.ymin, self.ymax)
        }
    }

    /// The two halves of a cut at `value` along `dim` (0 = x, 1 = y).
    pub fn cut(&self, dim: u8, value: f64) -> (BBox, BBox) {
        let (mut lo, mut hi) = (*self, *self);
        if dim == 0 {
            lo.xmax = value;
            hi.xmin = value;
        } else {
            lo.ymax = value;
            hi.ymin = value;
        }
        (lo, hi)
    }

    /// Grows the box symmetrically so that both sides are at least `min_side`.
    fn padded(mut self, min_side: f64) -> BBox {
        let w = self.xmax - self.xmin;
        if w < min_side {
            let pad = 0.5 * (min_side - w);
            self.xmin -= pad;
            self.xmax += pad;
        }
        let h = self.ymax - self.ymin;
        if h < min_side {
            let pad = 0.5 * (min_side - h);
            self.ymin -= pad;
            self.ymax += pad;
        }
        self
    }
}

/// Internal-node cut. Points with coordinate `<= value` belong to `left`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetSplit {
    /// 0 for x, 1 for y.
    pub dim: u8,
    pub value: f64,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetNode {
    pub bbox: BBox,
    /// Probability mass of the node divided by its area (1/m²).
    pub density: f64,
    pub split: Option<DetSplit>,
}

impl DetNode {
    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }
}

/// Piecewise-constant density over a binary partition of the root box. Node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityTree {
    nodes: Vec<DetNode>,
}

impl DensityTree {
    /// Checks that child indices point forward, stay in range, and that every
    /// node is reached exactly once.
    pub fn from_nodes(nodes: Vec<DetNode>) -> Result<Self, CompressError> {
        if nodes.is_empty() {
            return Err(CompressError::Empty);
        }
        let mut seen = vec![false; nodes.len()];
        seen[0] = true;
        for (i, n) in nodes.iter().enumerate() {
            if let Some(s) = n.split {
                for c in [s.left, s.right] {
                    if c <= i || c >= nodes.len() || seen[c] {
                        return Err(CompressError::Config(format!("node {i} has invalid child {c}")));
                    }
                    seen[c] = true;
                }
                if s.dim > 1 {
                    return Err(CompressError::Config(format!("node {i} splits on axis {}", s.dim)));
                }
            }
        }
        if let Some(orphan) = seen.iter().position(|s| !s) {
            return Err(CompressError::Config(format!("node {orphan} is unreachable")));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[DetNode] {
        &self.nodes
    }

    pub fn root(&self) -> &DetNode {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &DetNode> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    /// Sum of density × area over the leaves.
    pub fn integral(&self) -> f64 {
        self.leaves().map(|n| n.density * n.bbox.area()).sum()
    }
}

struct Candidate {
    gain: f64,
    dim: u8,
    value: f64,
}

/// Best cut of one leaf, scanning `tries` quantile cuts per axis. The score of a
/// cell holding `n` points in area `v` is `n² / v` (the squared-error density
/// criterion up to constants); the gain is the children's score minus the parent's.
fn best_cut(points: &[Position2D], members: &[usize], bbox: &BBox, tries: usize, min_side: f64) -> Option<Candidate> {
    let n = members.len();
    if n < 2 {
        return None;
    }
    let parent = (n * n) as f64 / bbox.area();
    let mut best: Option<Candidate> = None;
    for dim in 0..2u8 {
        let mut vals: Vec<f64> = members
            .iter()
            .map(|&i| if dim == 0 { points[i].x } else { points[i].y })
            .collect();
        vals.sort_by(f64::total_cmp);
        let (lo, hi) = bbox.span(dim);
        for q in 1..=tries {
            let idx = (q * n / (tries + 1)).clamp(1, n - 1);
            if vals[idx - 1] == vals[idx] {
                continue;
            }
            let value = 0.5 * (vals[idx - 1] + vals[idx]);
            if value - lo < min_side || hi - value < min_side {
                continue;
            }
            let left = vals.partition_point(|&v| v <= value);
            let (a, b) = bbox.cut(dim, value);
            let score = (left * left) as f64 / a.area() + ((n - left) * (n - left)) as f64 / b.area();
            let gain = score - parent;
            if gain > 0.0 && best.as_ref().is_none_or(|c| gain > c.gain) {
                best = Some(Candidate { gain, dim, value });
            }
        }
    }
    best
}

/// Greedy density estimation tree with at most `cfg.det_max_leaves` leaves.
pub fn build_det(s: &PositionSamples, cfg: &CompressionConfig) -> Result<DensityTree, CompressError> {
    let points = s.points();
    if points.len() < 2 {
        return Err(CompressError::TooFewSamples {
            requested: 2,
            available: points.len(),
        });
    }
    if cfg.det_max_leaves == 0 || cfg.det_tries == 0 || !(cfg.det_min_extent > 0.0) {
        return Err(CompressError::Config("invalid density tree limits".into()));
    }
    let total = points.len() as f64;
    let mut bbox = BBox::new(f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        bbox.xmin = bbox.xmin.min(p.x);
        bbox.xmax = bbox.xmax.max(p.x);
        bbox.ymin = bbox.ymin.min(p.y);
        bbox.ymax = bbox.ymax.max(p.y);
    }
    let bbox = bbox.padded(cfg.det_min_extent);
    let min_side = cfg.det_min_extent;

    let mut nodes = vec![DetNode {
        bbox,
        density: 1.0 / bbox.area(),
        split: None,
    }];
    // (node index, member indices, best cut)
    let all: Vec<usize> = (0..points.len()).collect();
    let first = best_cut(points, &all, &bbox, cfg.det_tries, min_side);
    let mut open = vec![(0usize, all, first)];
    let mut leaves = 1;
    while leaves < cfg.det_max_leaves {
        let pick = open
            .iter()
            .enumerate()
            .filter_map(|(k, (_, _, c))| c.as_ref().map(|c| (k, c.gain)))
            .fold(None, |acc: Option<(usize, f64)>, (k, g)| match acc {
                Some((_, bg)) if bg >= g => acc,
                _ => Some((k, g)),
            });
        let Some((k, _)) = pick else { break };
        let (node, members, cand) = open.swap_remove(k);
        let cand = cand.expect("picked leaf has a cut");
        let (lb, rb) = nodes[node].bbox.cut(cand.dim, cand.value);
        let coord = |i: &usize| if cand.dim == 0 { points[*i].x } else { points[*i].y };
        let (lm, rm): (Vec<usize>, Vec<usize>) = members.iter().partition(|i| coord(i) <= cand.value);
        let li = nodes.len();
        for (b, m) in [(lb, &lm), (rb, &rm)] {
            nodes.push(DetNode {
                bbox: b,
                density: m.len() as f64 / total / b.area(),
                split: None,
            });
        }
        nodes[node].split = Some(DetSplit {
            dim: cand.dim,
            value: cand.value,
            left: li,
            right: li + 1,
        });
        let lc = best_cut(points, &lm, &lb, cfg.det_tries, min_side);
        let rc = best_cut(points, &rm, &rb, cfg.det_tries, min_side);
        open.push((li, lm, lc));
        open.push((li + 1, rm, rc));
        leaves += 1;
    }
    Ok(DensityTree { nodes })
}

/// Density of the leaf containing `p`; zero outside the root box.
pub fn query_det(t: &DensityTree, p: &Position2D) -> f64 {
    let mut node = t.root();
    if !node.bbox.contains(p) {
        return 0.0;
    }
    while let Some(s) = node.split {
        let v = if s.dim == 0 { p.x } else { p.y };
        node = &t.nodes[if v <= s.value { s.left } else { s.right }];
    }
    node.density
}
