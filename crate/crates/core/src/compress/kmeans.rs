use super::{CompressError, PositionSamples};
use crate::geometry::{Cov2, Position2D};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Added to the diagonal of every cluster covariance (m²). Small enough that a
/// singleton cluster fuses like the point it stands for.
pub const COV_FLOOR: f64 = 1e-9;

/// World-frame Gaussian summarizing one cluster of projected samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianCluster {
    pub mean: Position2D,
    pub cov: Cov2,
    pub weight: f64,
}

fn nearest(p: &Position2D, centers: &[Position2D]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.iter().enumerate() {
        let d = p.distance_sq(c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn seed_plus_plus<R: Rng + ?Sized>(points: &[Position2D], k: usize, rng: &mut R) -> Vec<Position2D> {
    let mut centers = Vec::with_capacity(k);
    centers.push(points[rng.random_range(0..points.len())]);
    let mut d2: Vec<f64> = points.iter().map(|p| p.distance_sq(&centers[0])).collect();
    while centers.len() < k {
        let next = match WeightedIndex::new(&d2) {
            Ok(dist) => dist.sample(rng),
            // every point already coincides with a center
            Err(_) => rng.random_range(0..points.len()),
        };
        let c = points[next];
        centers.push(c);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(p.distance_sq(&c));
        }
    }
    centers
}

/// K-means with k-means++ seeding and exactly `iters` Lloyd iterations.
///
/// Weights are member fractions; covariances are population covariances plus
/// [`COV_FLOOR`] on the diagonal. A cluster that ends up empty keeps its center
/// with zero weight.
pub fn kmeans_cluster<R: Rng + ?Sized>(
    s: &PositionSamples,
    k: usize,
    iters: usize,
    rng: &mut R,
) -> Result<Vec<GaussianCluster>, CompressError> {
    let points = s.points();
    if k == 0 {
        return Err(CompressError::Config("cluster count must be at least 1".into()));
    }
    if points.len() < k {
        return Err(CompressError::TooFewSamples {
            requested: k,
            available: points.len(),
        });
    }
    let mut centers = seed_plus_plus(points, k, rng);
    let mut labels = vec![0usize; points.len()];
    for _ in 0..iters {
        assign(points, &centers, &mut labels);
        let mut sums = vec![(0.0, 0.0, 0usize); k];
        for (p, &l) in points.iter().zip(&labels) {
            sums[l].0 += p.x;
            sums[l].1 += p.y;
            sums[l].2 += 1;
        }
        for (c, &(sx, sy, n)) in centers.iter_mut().zip(&sums) {
            if n > 0 {
                *c = Position2D::new(sx / n as f64, sy / n as f64);
            }
        }
    }
    assign(points, &centers, &mut labels);

    let n = points.len() as f64;
    let mut out = Vec::with_capacity(k);
    for (j, c) in centers.iter().enumerate() {
        let members: Vec<&Position2D> = points
            .iter()
            .zip(&labels)
            .filter(|(_, &l)| l == j)
            .map(|(p, _)| p)
            .collect();
        if members.is_empty() {
            out.push(GaussianCluster {
                mean: *c,
                cov: Cov2::isotropic(COV_FLOOR),
                weight: 0.0,
            });
            continue;
        }
        let m = members.len() as f64;
        let mx = members.iter().map(|p| p.x).sum::<f64>() / m;
        let my = members.iter().map(|p| p.y).sum::<f64>() / m;
        let (mut xx, mut xy, mut yy) = (0.0, 0.0, 0.0);
        for p in &members {
            let (dx, dy) = (p.x - mx, p.y - my);
            xx += dx * dx;
            xy += dx * dy;
            yy += dy * dy;
        }
        out.push(GaussianCluster {
            mean: Position2D::new(mx, my),
            cov: Cov2::new(xx / m, xy / m, yy / m).floored(COV_FLOOR),
            weight: m / n,
        });
    }
    Ok(out)
}

fn assign(points: &[Position2D], centers: &[Position2D], labels: &mut [usize]) {
    for (p, l) in points.iter().zip(labels.iter_mut()) {
        *l = nearest(p, centers).0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::Normal;

    #[test]
    fn two_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let noise = Normal::new(0.0, 0.1).unwrap();
        let mut pts = Vec::new();
        for c in [(0.0, 0.0), (10.0, 10.0)] {
            for _ in 0..50 {
                pts.push(Position2D::new(
                    c.0 + noise.sample(&mut rng),
                    c.1 + noise.sample(&mut rng),
                ));
            }
        }
        let s = PositionSamples::new(pts).unwrap();
        let mut cl = kmeans_cluster(&s, 2, 5, &mut rng).unwrap();
        cl.sort_by(|a, b| a.mean.x.total_cmp(&b.mean.x));
        assert!(cl[0].mean.distance(&Position2D::new(0.0, 0.0)) < 0.2);
        assert!(cl[1].mean.distance(&Position2D::new(10.0, 10.0)) < 0.2);
        assert!(cl.iter().all(|c| (c.weight - 0.5).abs() < 1e-12));
    }

    #[test]
    fn singletons_get_floor_covariance() {
        let pts: Vec<Position2D> = (0..12)
            .map(|i| Position2D::new(i as f64, (i * i) as f64 * 0.1))
            .collect();
        let s = PositionSamples::new(pts).unwrap();
        let cl = kmeans_cluster(&s, 12, 5, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for c in &cl {
            assert_eq!(c.cov, Cov2::isotropic(COV_FLOOR));
            assert!((c.weight - 1.0 / 12.0).abs() < 1e-15);
        }
    }

    #[test]
    fn repeated_point() {
        let p = Position2D::new(2.0, 3.0);
        let s = PositionSamples::new(vec![p; 9]).unwrap();
        let cl = kmeans_cluster(&s, 1, 5, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(cl[0].mean, p);
        assert_eq!(cl[0].cov, Cov2::isotropic(COV_FLOOR));
        assert!(kmeans_cluster(&s, 10, 5, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }
}
