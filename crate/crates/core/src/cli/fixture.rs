//! Representatives each compression method picks from a point fixture.

use crate::compress::{
    build_det, compresspp, dnc_cluster, iid_thin, kmeans_cluster, CompressError, CompressionConfig, KernelConfig,
    PositionSamples,
};
use crate::geometry::{Detection, Pose, Position2D};
use crate::mcl::Belief;
use crate::wire::Method;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Representative {
    pub point: Position2D,
    pub weight: f64,
}

/// Summary of `points` with `k` representatives (the full set for `naive`).
/// Points are treated as equal-weight positions: the clustering methods see them
/// as poses with heading 0 and a zero-range detection. Compress++ always returns
/// the square root of the largest power of four not above the input size.
pub fn representatives<R: Rng + ?Sized>(
    points: &[Position2D],
    method: Method,
    k: usize,
    rng: &mut R,
) -> Result<Vec<Representative>, CompressError> {
    let s = PositionSamples::new(points.to_vec())?;
    let n = points.len() as f64;
    let equal = |pts: &[Position2D]| {
        let w = 1.0 / pts.len() as f64;
        pts.iter().map(|&point| Representative { point, weight: w }).collect()
    };
    Ok(match method {
        Method::Naive => points
            .iter()
            .map(|&point| Representative { point, weight: 1.0 / n })
            .collect(),
        Method::StdThinning => equal(iid_thin(&s, k, rng)?.points()),
        Method::Compresspp => {
            let cfg = CompressionConfig::default();
            equal(compresspp(&s, &cfg, &KernelConfig::default(), rng)?.points())
        }
        Method::Kmeans => kmeans_cluster(&s, k, CompressionConfig::default().kmeans_iters, rng)?
            .iter()
            .map(|c| Representative {
                point: c.mean,
                weight: c.weight,
            })
            .collect(),
        Method::Prorok => {
            let b = Belief::from_poses(points.iter().map(|p| Pose::new(p.x, p.y, 0.0)))
                .map_err(|_| CompressError::Empty)?;
            dnc_cluster(&b, &Detection::new(0.0, 0.0), k)?
                .iter()
                .map(|c| Representative {
                    point: c.centroid.position(),
                    weight: c.weight,
                })
                .collect()
        }
        Method::Det => {
            let cfg = CompressionConfig {
                det_max_leaves: k,
                ..Default::default()
            };
            build_det(&s, &cfg)?
                .leaves()
                .map(|l| Representative {
                    point: Position2D::new(0.5 * (l.bbox.xmin + l.bbox.xmax), 0.5 * (l.bbox.ymin + l.bbox.ymax)),
                    weight: l.density * l.bbox.area(),
                })
                .collect()
        }
    })
}
