use super::kernel::gaussian_kernel;
use super::{CompressError, CompressionConfig, KernelConfig, PositionSamples};
use crate::geometry::Position2D;
use rand::seq::index;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Thinned subset of a position sample set. Coordinates are copied exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreSet {
    points: Vec<Position2D>,
}

impl CoreSet {
    pub fn new(points: Vec<Position2D>) -> Result<Self, CompressError> {
        if points.is_empty() {
            return Err(CompressError::Empty);
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Position2D] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_samples(&self) -> PositionSamples {
        PositionSamples {
            points: self.points.clone(),
        }
    }
}

/// `k` points drawn uniformly without replacement.
pub fn iid_thin<R: Rng + ?Sized>(s: &PositionSamples, k: usize, rng: &mut R) -> Result<PositionSamples, CompressError> {
    if k > s.len() {
        return Err(CompressError::TooFewSamples {
            requested: k,
            available: s.len(),
        });
    }
    if k == 0 {
        return Err(CompressError::Empty);
    }
    let points = index::sample(rng, s.len(), k)
        .into_iter()
        .map(|i| s.points[i])
        .collect();
    Ok(PositionSamples { points })
}

/// One round of greedy pairwise kernel halving; bandwidth from `kcfg`.
pub fn kt_halve<R: Rng + ?Sized>(
    s: &PositionSamples,
    kcfg: &KernelConfig,
    rng: &mut R,
) -> Result<PositionSamples, CompressError> {
    let h = kcfg.resolve(&s.points);
    kt_halve_with_bandwidth(s, h, rng)
}

pub fn kt_halve_with_bandwidth<R: Rng + ?Sized>(
    s: &PositionSamples,
    h: f64,
    rng: &mut R,
) -> Result<PositionSamples, CompressError> {
    if !s.len().is_multiple_of(2) {
        return Err(CompressError::OddInput(s.len()));
    }
    Ok(PositionSamples {
        points: halve(&s.points, h, rng),
    })
}

fn halve<R: Rng + ?Sized>(points: &[Position2D], h: f64, rng: &mut R) -> Vec<Position2D> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.shuffle(rng);
    let half = points.len() / 2;
    let mut first = Vec::with_capacity(half);
    let mut second = Vec::with_capacity(half);
    for pair in order.chunks_exact(2) {
        let (x, x2) = (points[pair[0]], points[pair[1]]);
        // Placing x with the first set is better when x sits closer (in kernel
        // mass) to the second set than x2 does.
        let mut delta = 0.0;
        for p in &first {
            delta += gaussian_kernel(&x, p, h) - gaussian_kernel(&x2, p, h);
        }
        for p in &second {
            delta -= gaussian_kernel(&x, p, h) - gaussian_kernel(&x2, p, h);
        }
        if delta <= 0.0 {
            first.push(x);
            second.push(x2);
        } else {
            first.push(x2);
            second.push(x);
        }
    }
    if rng.random_bool(0.5) {
        first
    } else {
        second
    }
}

/// Largest power of four not exceeding `n` (n ≥ 1).
fn floor_power_of_four(n: usize) -> usize {
    let mut p = 1usize;
    while p * 4 <= n {
        p *= 4;
    }
    p
}

/// Number of points [`compresspp`] returns for an input of `n` samples.
pub fn compresspp_output_size(n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    floor_power_of_four(n).isqrt()
}

/// Root-thinning: keeps `sqrt(n)` points, where `n` is the largest power of four
/// not exceeding the input size.
pub fn compresspp<R: Rng + ?Sized>(
    s: &PositionSamples,
    cfg: &CompressionConfig,
    kcfg: &KernelConfig,
    rng: &mut R,
) -> Result<CoreSet, CompressError> {
    if s.len() < 4 {
        return Err(CompressError::TooFewSamples {
            requested: 4,
            available: s.len(),
        });
    }
    if cfg.oversample_g == 0 {
        return Err(CompressError::Config("oversample_g must be at least 1".into()));
    }
    let n = floor_power_of_four(s.len());
    let truncated: Vec<Position2D> = if n == s.len() {
        s.points.clone()
    } else {
        index::sample(rng, s.len(), n)
            .into_iter()
            .map(|i| s.points[i])
            .collect()
    };
    let h = kcfg.resolve(&truncated);
    let log4n = n.trailing_zeros() as usize / 2;
    let g = cfg.oversample_g.min(log4n);

    let mut out = compress(truncated, g, h, rng);
    for _ in 0..g {
        out = halve(&out, h, rng);
    }
    debug_assert_eq!(out.len(), n.isqrt());
    CoreSet::new(out)
}

/// Returns `2^g * sqrt(|points|)` points; `|points|` is a power of four ≥ `4^g`.
fn compress<R: Rng + ?Sized>(mut points: Vec<Position2D>, g: usize, h: f64, rng: &mut R) -> Vec<Position2D> {
    if points.len() <= 1 << (2 * g) {
        return points;
    }
    points.shuffle(rng);
    let quarter = points.len() / 4;
    let mut merged = Vec::with_capacity(2 * (1 << g) * points.len().isqrt());
    for part in points.chunks_exact(quarter) {
        merged.extend(compress(part.to_vec(), g, h, rng));
    }
    halve(&merged, h, rng)
}
