//! Five-region point formation: four regions on a diamond plus one at its center.

use super::{BBox, PositionSamples};
use crate::geometry::Position2D;
use rand::Rng;

/// Distance from the formation center to each outer region center (m).
pub const DIAMOND_RADIUS: f64 = 3.0;
/// Side of each square region (m).
pub const REGION_SIDE: f64 = 1.0;
pub const POINTS_PER_REGION: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct Formation {
    pub points: Vec<Position2D>,
    /// Region index of every point.
    pub labels: Vec<usize>,
    pub regions: Vec<BBox>,
}

impl Formation {
    pub fn samples(&self) -> PositionSamples {
        PositionSamples::new(self.points.clone()).expect("formation is nonempty")
    }

    pub fn region_of(&self, p: &Position2D) -> Option<usize> {
        self.regions.iter().position(|r| r.contains(p))
    }

    /// Number of distinct regions hit by `points`.
    pub fn regions_covered(&self, points: &[Position2D]) -> usize {
        let mut hit = vec![false; self.regions.len()];
        for p in points {
            if let Some(r) = self.region_of(p) {
                hit[r] = true;
            }
        }
        hit.iter().filter(|h| **h).count()
    }
}

fn region_centers() -> [Position2D; 5] {
    let r = DIAMOND_RADIUS;
    [
        Position2D::new(0.0, r),
        Position2D::new(r, 0.0),
        Position2D::new(0.0, -r),
        Position2D::new(-r, 0.0),
        Position2D::new(0.0, 0.0),
    ]
}

/// Points drawn uniformly inside each region, region by region.
pub fn diamond_center<R: Rng + ?Sized>(rng: &mut R) -> Formation {
    let half = 0.5 * REGION_SIDE;
    let regions: Vec<BBox> = region_centers()
        .iter()
        .map(|c| BBox::new(c.x - half, c.x + half, c.y - half, c.y + half))
        .collect();
    let mut points = Vec::with_capacity(regions.len() * POINTS_PER_REGION);
    let mut labels = Vec::with_capacity(points.capacity());
    for (k, r) in regions.iter().enumerate() {
        for _ in 0..POINTS_PER_REGION {
            points.push(Position2D::new(
                rng.random_range(r.xmin..r.xmax),
                rng.random_range(r.ymin..r.ymax),
            ));
            labels.push(k);
        }
    }
    Formation {
        points,
        labels,
        regions,
    }
}
