use super::CompressError;
use crate::geometry::{to_absolute, to_relative, wrap_pi, wrap_two_pi, Detection, Pose};
use crate::mcl::{Belief, Particle};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Cluster of sender particles with the detection statistics seen from its centroid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterAbstraction {
    pub centroid: Pose,
    pub weight: f64,
    /// Mean `(range, bearing)` of the detected robot relative to the centroid.
    pub detection_mean: (f64, f64),
    /// Variances `(range², bearing²)` of the same.
    pub detection_var: (f64, f64),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Axis {
    X,
    Y,
}

fn coord(p: &Particle, axis: Axis) -> f64 {
    match axis {
        Axis::X => p.pose.x,
        Axis::Y => p.pose.y,
    }
}

/// Total order used wherever members must be sorted; independent of input order.
fn lexicographic(a: &Particle, b: &Particle) -> Ordering {
    a.pose
        .x
        .total_cmp(&b.pose.x)
        .then(a.pose.y.total_cmp(&b.pose.y))
        .then(a.pose.theta.total_cmp(&b.pose.theta))
        .then(a.weight.total_cmp(&b.weight))
}

fn weighted_variance(cell: &[Particle], axis: Axis) -> f64 {
    let w: f64 = cell.iter().map(|p| p.weight).sum();
    if !(w > 0.0) {
        return 0.0;
    }
    let mean = cell.iter().map(|p| p.weight * coord(p, axis)).sum::<f64>() / w;
    cell.iter()
        .map(|p| p.weight * (coord(p, axis) - mean).powi(2))
        .sum::<f64>()
        / w
}

/// Splits a cell at the weighted median of its widest axis. Members equal to the
/// median go left. When that leaves a side empty the cell is split by count in
/// lexicographic order instead.
fn split(mut cell: Vec<Particle>) -> (Vec<Particle>, Vec<Particle>) {
    cell.sort_by(lexicographic);
    let axis = if weighted_variance(&cell, Axis::Y) > weighted_variance(&cell, Axis::X) {
        Axis::Y
    } else {
        Axis::X
    };
    cell.sort_by(|a, b| coord(a, axis).total_cmp(&coord(b, axis)).then(lexicographic(a, b)));
    let total: f64 = cell.iter().map(|p| p.weight).sum();
    let mut acc = 0.0;
    let mut median = coord(&cell[cell.len() - 1], axis);
    for p in &cell {
        acc += p.weight;
        // tolerance keeps equal-weight halves from losing to rounding
        if acc >= 0.5 * total * (1.0 - 1e-12) {
            median = coord(p, axis);
            break;
        }
    }
    let cut = cell.partition_point(|p| coord(p, axis) <= median);
    if cut == 0 || cut == cell.len() {
        cell.sort_by(lexicographic);
        let right = cell.split_off(cell.len() / 2);
        return (cell, right);
    }
    let right = cell.split_off(cut);
    (cell, right)
}

fn summarize(cell: &[Particle], d: &Detection, total: f64) -> ClusterAbstraction {
    let w: f64 = cell.iter().map(|p| p.weight).sum();
    let norm = |p: &Particle| if w > 0.0 { p.weight / w } else { 1.0 / cell.len() as f64 };
    let (mut x, mut y, mut s, mut c) = (0.0, 0.0, 0.0, 0.0);
    for p in cell {
        let a = norm(p);
        x += a * p.pose.x;
        y += a * p.pose.y;
        s += a * p.pose.theta.sin();
        c += a * p.pose.theta.cos();
    }
    let centroid = Pose::new(x, y, wrap_two_pi(s.atan2(c)));

    let rel: Vec<(f64, Detection)> = cell
        .iter()
        .map(|p| (norm(p), to_relative(&to_absolute(d, &p.pose), &centroid)))
        .collect();
    let (mut r, mut bs, mut bc) = (0.0, 0.0, 0.0);
    for (a, q) in &rel {
        r += a * q.range;
        bs += a * q.bearing.sin();
        bc += a * q.bearing.cos();
    }
    let bearing = bs.atan2(bc);
    let (mut vr, mut vb) = (0.0, 0.0);
    for (a, q) in &rel {
        vr += a * (q.range - r).powi(2);
        vb += a * wrap_pi(q.bearing - bearing).powi(2);
    }
    ClusterAbstraction {
        centroid,
        weight: if total > 0.0 {
            w / total
        } else {
            1.0 / cell.len() as f64
        },
        detection_mean: (r, bearing),
        detection_var: (vr, vb),
    }
}

/// Cells of the median-split partition of `b` into at most `k` parts.
///
/// Every cell is split once per level, so `k` must be a power of two. Cells that
/// cannot be split any further (a single particle) are kept as they are and
/// empty cells are dropped, so the result may hold fewer than `k` cells.
pub fn dnc_partition(b: &Belief, k: usize) -> Result<Vec<Vec<Particle>>, CompressError> {
    if !k.is_power_of_two() {
        return Err(CompressError::NotPowerOfTwo(k));
    }
    if b.len() < k {
        return Err(CompressError::TooFewSamples {
            requested: k,
            available: b.len(),
        });
    }
    let mut cells = vec![b.particles().to_vec()];
    for _ in 0..k.trailing_zeros() {
        let mut next = Vec::with_capacity(cells.len() * 2);
        for cell in cells {
            if cell.len() < 2 {
                next.push(cell);
                continue;
            }
            let (l, r) = split(cell);
            next.push(l);
            next.push(r);
        }
        cells = next;
    }
    cells.retain(|c| !c.is_empty());
    Ok(cells)
}

/// Median-split clustering of the sender's particles into at most `k` clusters
/// (see [`dnc_partition`]). Output order is canonical.
pub fn dnc_cluster(b: &Belief, d: &Detection, k: usize) -> Result<Vec<ClusterAbstraction>, CompressError> {
    let cells = dnc_partition(b, k)?;
    let total = b.weight_sum();
    let mut out: Vec<ClusterAbstraction> = cells.iter().map(|c| summarize(c, d, total)).collect();
    if !(total > 0.0) {
        let n = out.len() as f64;
        out.iter_mut().for_each(|c| c.weight = 1.0 / n);
    }
    Ok(out)
}
