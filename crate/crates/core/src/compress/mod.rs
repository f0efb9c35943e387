//! Belief compression backends and the kernel discrepancy used to judge them.
//!
//! Every backend starts from the sender's particles. Thinning, K-means, DET and
//! Compress++ work on the projected position samples (where the detected robot
//! would be, according to each sender particle); divide-and-conquer clustering
//! works on the sender's own poses and carries detection statistics per cluster.

mod det;
mod dnc;
pub mod fixture;
mod kernel;
mod kmeans;
mod thinning;

pub use det::{build_det, query_det, BBox, DensityTree, DetNode, DetSplit};
pub use dnc::{dnc_cluster, dnc_partition, ClusterAbstraction};
pub use kernel::{gaussian_kernel, median_heuristic, mmd, Bandwidth, KernelConfig};
pub use kmeans::{kmeans_cluster, GaussianCluster, COV_FLOOR};
pub use thinning::{compresspp, compresspp_output_size, iid_thin, kt_halve, kt_halve_with_bandwidth, CoreSet};

use crate::geometry::{to_absolute, Detection, Position2D};
use crate::mcl::Belief;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CompressError {
    #[error("sample set is empty")]
    Empty,
    #[error("requested {requested} samples from a set of {available}")]
    TooFewSamples { requested: usize, available: usize },
    #[error("halving needs an even number of samples, got {0}")]
    OddInput(usize),
    #[error("cluster count must be a power of two, got {0}")]
    NotPowerOfTwo(usize),
    #[error("invalid compression parameter: {0}")]
    Config(String),
}

/// Equal-weight position samples in the world frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionSamples {
    points: Vec<Position2D>,
}

impl PositionSamples {
    pub fn new(points: Vec<Position2D>) -> Result<Self, CompressError> {
        if points.is_empty() {
            return Err(CompressError::Empty);
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[Position2D] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Position2D> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompressionConfig {
    pub k_clusters: usize,
    pub kmeans_iters: usize,
    pub det_max_leaves: usize,
    pub det_tries: usize,
    /// Smallest side length (m) of a DET box.
    pub det_min_extent: f64,
    pub oversample_g: usize,
    pub thinning_k: usize,
}

impl Default for CompressionConfig {
    fn default() -> Self {
        Self {
            k_clusters: 8,
            kmeans_iters: 5,
            det_max_leaves: 20,
            det_tries: 10,
            det_min_extent: 0.05,
            oversample_g: 4,
            thinning_k: 64,
        }
    }
}

impl CompressionConfig {
    pub fn validate(&self) -> Result<(), CompressError> {
        let counts = [
            ("k_clusters", self.k_clusters),
            ("kmeans_iters", self.kmeans_iters),
            ("det_max_leaves", self.det_max_leaves),
            ("det_tries", self.det_tries),
            ("oversample_g", self.oversample_g),
            ("thinning_k", self.thinning_k),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(CompressError::Config(format!("{name} must be at least 1")));
        }
        if !(self.det_min_extent > 0.0) {
            return Err(CompressError::Config("det_min_extent must be positive".into()));
        }
        Ok(())
    }
}

/// Where the detected robot is according to each sender particle.
pub fn project_samples(particles: &Belief, d: &Detection) -> PositionSamples {
    PositionSamples {
        points: particles.particles().iter().map(|p| to_absolute(d, &p.pose)).collect(),
    }
}
