use super::{CompressError, PositionSamples};
use crate::geometry::Position2D;
use crate::numeric::{compensated_sum, median};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Kernel bandwidth: explicit (meters) or the median pairwise distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    Fixed(f64),
    #[default]
    MedianHeuristic,
}

/// Gaussian kernel settings. The kernel family is fixed to Gaussian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct KernelConfig {
    pub bandwidth: Bandwidth,
}

impl KernelConfig {
    pub fn fixed(h: f64) -> Self {
        assert!(h > 0.0, "bandwidth must be positive");
        Self {
            bandwidth: Bandwidth::Fixed(h),
        }
    }

    /// Concrete bandwidth for a point set.
    pub fn resolve(&self, points: &[Position2D]) -> f64 {
        match self.bandwidth {
            Bandwidth::Fixed(h) => h,
            Bandwidth::MedianHeuristic => median_heuristic(points),
        }
    }
}

/// Subsample size above which the median heuristic uses an evenly strided subset.
const MEDIAN_SUBSAMPLE: usize = 256;

/// Median pairwise distance over (a strided subsample of) the points. Falls back
/// to 1.0 when all points coincide.
pub fn median_heuristic(points: &[Position2D]) -> f64 {
    let sub: Vec<Position2D> = if points.len() > MEDIAN_SUBSAMPLE {
        (0..MEDIAN_SUBSAMPLE)
            .map(|i| points[i * points.len() / MEDIAN_SUBSAMPLE])
            .collect()
    } else {
        points.to_vec()
    };
    let mut dists = Vec::with_capacity(sub.len() * sub.len().saturating_sub(1) / 2);
    for (i, a) in sub.iter().enumerate() {
        for b in &sub[i + 1..] {
            dists.push(a.distance(b));
        }
    }
    match median(&dists) {
        Some(m) if m > 0.0 => m,
        _ => 1.0,
    }
}

#[inline]
pub fn gaussian_kernel(a: &Position2D, b: &Position2D, h: f64) -> f64 {
    (-a.distance_sq(b) / (2.0 * h * h)).exp()
}

fn cross_sum(a: &[Position2D], b: &[Position2D], h: f64) -> f64 {
    let rows: Vec<f64> = a
        .par_iter()
        .with_min_len(32)
        .map(|p| compensated_sum(b.iter().map(|q| gaussian_kernel(p, q, h))))
        .collect();
    compensated_sum(rows)
}

/// Sum of `k(x_i, x_j)` over all ordered pairs, using symmetry.
fn self_sum(a: &[Position2D], h: f64) -> f64 {
    let rows: Vec<f64> = (0..a.len())
        .into_par_iter()
        .with_min_len(32)
        .map(|i| compensated_sum(a[i + 1..].iter().map(|q| gaussian_kernel(&a[i], q, h))))
        .collect();
    // diagonal terms are exactly 1
    2.0 * compensated_sum(rows) + a.len() as f64
}

/// Biased (V-statistic) maximum mean discrepancy under a Gaussian kernel.
///
/// With the median heuristic the bandwidth is taken over the union of both sets.
pub fn mmd(a: &PositionSamples, b: &PositionSamples, kcfg: &KernelConfig) -> Result<f64, CompressError> {
    if a.is_empty() || b.is_empty() {
        return Err(CompressError::Empty);
    }
    let h = match kcfg.bandwidth {
        Bandwidth::Fixed(h) => h,
        Bandwidth::MedianHeuristic => {
            let union: Vec<Position2D> = a.points().iter().chain(b.points()).copied().collect();
            median_heuristic(&union)
        }
    };
    Ok(mmd_with_bandwidth(a.points(), b.points(), h))
}

pub(crate) fn mmd_with_bandwidth(a: &[Position2D], b: &[Position2D], h: f64) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let kaa = self_sum(a, h) / (na * na);
    let kbb = self_sum(b, h) / (nb * nb);
    let kab = cross_sum(a, b, h) / (na * nb);
    (kaa - 2.0 * kab + kbb).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(pts: &[(f64, f64)]) -> PositionSamples {
        PositionSamples::new(pts.iter().map(|&(x, y)| Position2D::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn mmd_of_identical_sets_is_zero() {
        let a = samples(&[(0.0, 0.0), (1.0, 2.0), (-3.0, 0.5)]);
        assert!(mmd(&a, &a, &KernelConfig::default()).unwrap() < 1e-9);
    }

    #[test]
    fn mmd_of_singletons_closed_form() {
        let a = samples(&[(0.0, 0.0)]);
        let b = samples(&[(1.0, 1.0)]);
        let h = 0.7;
        let k = (-2.0f64 / (2.0 * h * h)).exp();
        let expected = (2.0 - 2.0 * k).sqrt();
        let got = mmd(&a, &b, &KernelConfig::fixed(h)).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn median_heuristic_of_three_points() {
        let pts = [
            Position2D::new(0.0, 0.0),
            Position2D::new(3.0, 0.0),
            Position2D::new(0.0, 4.0),
        ];
        // pairwise distances 3, 4, 5
        assert_eq!(median_heuristic(&pts), 4.0);
        assert_eq!(median_heuristic(&[Position2D::new(1.0, 1.0); 4]), 1.0);
    }
}
