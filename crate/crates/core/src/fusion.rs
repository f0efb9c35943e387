//! Receiver-side update from a detection message, plus the sender-side summaries.
//!
//! The receiver multiplies every particle weight by the likelihood of its position
//! under the sender's summarized belief about where the receiver is, then refills
//! some resampling slots with draws from that distribution (reciprocal sampling).

use crate::compress::{
    build_det, compresspp, dnc_cluster, kmeans_cluster, project_samples, query_det, ClusterAbstraction, CompressError,
    CompressionConfig, DensityTree, GaussianCluster, KernelConfig,
};
use crate::geometry::{to_absolute, to_relative, wrap_pi, Cov2, Detection, Pose, Position2D};
use crate::mcl::{resample_low_variance, systematic_indices, Belief, MclError, Particle};
use crate::wire::{
    records_to_tree, tree_to_records, AbstractionRecord, BeliefSummary, ClusterRecord, Method, Payload, PointRecord,
    PoseRecord, WireError,
};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use thiserror::Error;

/// Added to every particle likelihood before renormalizing, so a receiver whose
/// particles all sit far from the message never ends up with all-zero weights.
pub const LIKELIHOOD_FLOOR: f64 = 1e-12;

/// Reciprocal sampling probability used unless configured otherwise.
pub const DEFAULT_ALPHA: f64 = 0.06;

/// Smallest per-axis variance (m²) of the Cartesian detection noise.
const MIN_CARTESIAN_VAR: f64 = 1e-4;

#[derive(Debug, Error, PartialEq)]
pub enum FusionError {
    #[error("message payload is empty")]
    EmptyPayload,
    #[error("{got} message cannot be fused by a {expected} strategy")]
    WrongMethod { expected: Method, got: Method },
    #[error("reciprocal sampling is not available for {0} messages")]
    NoReciprocal(Method),
    #[error("alpha must lie in [0, 1], got {0}")]
    BadAlpha(f64),
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error(transparent)]
    Compress(#[from] CompressError),
    #[error(transparent)]
    Mcl(#[from] MclError),
}

/// Range-dependent detection noise: `σ_r = range_scale · r`, `σ_θ = bearing_sigma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectionModel {
    pub range_scale: f64,
    pub bearing_sigma: f64,
}

impl Default for DetectionModel {
    fn default() -> Self {
        Self {
            range_scale: 0.05,
            bearing_sigma: 0.03,
        }
    }
}

impl DetectionModel {
    /// Isotropic world-frame covariance with the same trace as the polar noise
    /// linearized at `range`. The sender's heading is uncertain, so no single
    /// orientation of the linearized ellipse is available on the receiver side.
    pub fn cartesian(&self, range: f64) -> Cov2 {
        let sr = self.range_scale * range;
        let st = self.bearing_sigma * range;
        Cov2::isotropic((0.5 * (sr * sr + st * st)).max(MIN_CARTESIAN_VAR))
    }

    /// Polar variances `(σ_r², σ_θ²)` at `range`.
    pub fn polar(&self, range: f64) -> (f64, f64) {
        let sr = (self.range_scale * range).max(MIN_CARTESIAN_VAR.sqrt());
        (sr * sr, self.bearing_sigma * self.bearing_sigma)
    }
}

/// Exchange strategy with its reciprocal sampling probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionStrategy {
    pub method: Method,
    pub alpha: f64,
}

impl FusionStrategy {
    /// `alpha` is clamped to zero for density trees, which do not support
    /// reciprocal sampling.
    pub fn new(method: Method, alpha: f64) -> Result<Self, FusionError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(FusionError::BadAlpha(alpha));
        }
        let alpha = if method == Method::Det { 0.0 } else { alpha };
        Ok(Self { method, alpha })
    }
}

/// Bivariate normal density of `x` around `center`. A singular covariance is
/// floored on the diagonal first.
pub fn detection_likelihood(x: &Position2D, center: &Position2D, sigma: &Cov2) -> f64 {
    let s = if sigma.det() > 0.0 {
        *sigma
    } else {
        sigma.floored(1e-12)
    };
    let m = s
        .mahalanobis_sq(x.x - center.x, x.y - center.y)
        .unwrap_or(f64::INFINITY);
    (-0.5 * m).exp() / (TAU * s.det().sqrt())
}

/// Message contents in receiver terms (f64, world frame).
#[derive(Debug, Clone, PartialEq)]
pub enum ReceivedBelief {
    /// Equal-weight point mixture sharing one covariance.
    Points {
        centers: Vec<Position2D>,
        sigma: Cov2,
    },
    Mixture {
        clusters: Vec<GaussianCluster>,
        sigma: Cov2,
    },
    Polar {
        clusters: Vec<ClusterAbstraction>,
        model: DetectionModel,
    },
    Density(DensityTree),
}

impl ReceivedBelief {
    pub fn from_summary(msg: &BeliefSummary, model: &DetectionModel) -> Result<Self, FusionError> {
        msg.check()?;
        if msg.payload.is_empty() {
            return Err(FusionError::EmptyPayload);
        }
        let d = Detection::new(msg.range as f64, msg.bearing as f64);
        let sigma = model.cartesian(d.range);
        Ok(match &msg.payload {
            Payload::Poses(v) => ReceivedBelief::Points {
                centers: v
                    .iter()
                    .map(|r| to_absolute(&d, &Pose::new(r.x as f64, r.y as f64, r.theta as f64)))
                    .collect(),
                sigma,
            },
            Payload::Points(v) => ReceivedBelief::Points {
                centers: v.iter().map(|r| Position2D::new(r.x as f64, r.y as f64)).collect(),
                sigma,
            },
            Payload::Clusters(v) => ReceivedBelief::Mixture {
                clusters: v
                    .iter()
                    .map(|r| GaussianCluster {
                        mean: Position2D::new(r.cx as f64, r.cy as f64),
                        cov: Cov2::new(r.cxx as f64, r.cxy as f64, r.cyy as f64),
                        weight: r.w as f64,
                    })
                    .collect(),
                sigma,
            },
            Payload::Abstractions(v) => ReceivedBelief::Polar {
                clusters: v
                    .iter()
                    .map(|r| ClusterAbstraction {
                        centroid: Pose::new(r.cx as f64, r.cy as f64, r.ctheta as f64),
                        weight: r.w as f64,
                        detection_mean: (r.mu_r as f64, r.mu_theta as f64),
                        detection_var: (r.var_r as f64, r.var_theta as f64),
                    })
                    .collect(),
                model: *model,
            },
            Payload::Tree(v) => ReceivedBelief::Density(records_to_tree(v)?),
        })
    }

    /// Likelihood of the receiver being at `x`.
    pub fn likelihood(&self, x: &Position2D) -> f64 {
        match self {
            ReceivedBelief::Points { centers, sigma } => point_mixture(x, centers, sigma),
            ReceivedBelief::Mixture { clusters, sigma } => clusters
                .iter()
                .map(|c| c.weight * detection_likelihood(x, &c.mean, &c.cov.add(sigma)))
                .sum(),
            ReceivedBelief::Polar { clusters, model } => {
                clusters.iter().map(|c| c.weight * polar_component(x, c, model)).sum()
            }
            ReceivedBelief::Density(t) => query_det(t, x),
        }
    }
}

/// Equal-weight Gaussian mixture over `centers`. Written out so the isotropic
/// case costs one exponential per center.
fn point_mixture(x: &Position2D, centers: &[Position2D], sigma: &Cov2) -> f64 {
    let s = if sigma.det() > 0.0 {
        *sigma
    } else {
        sigma.floored(1e-12)
    };
    let norm = 1.0 / (TAU * s.det().sqrt() * centers.len() as f64);
    let inv = s.inverse().expect("floored covariance is invertible");
    let mut acc = 0.0;
    for c in centers {
        let (dx, dy) = (x.x - c.x, x.y - c.y);
        acc += (-0.5 * (inv.xx * dx * dx + 2.0 * inv.xy * dx * dy + inv.yy * dy * dy)).exp();
    }
    acc * norm
}

fn polar_component(x: &Position2D, c: &ClusterAbstraction, model: &DetectionModel) -> f64 {
    let rel = to_relative(x, &c.centroid);
    let (nr, nt) = model.polar(c.detection_mean.0);
    let vr = c.detection_var.0 + nr;
    let vt = c.detection_var.1 + nt;
    let dr = rel.range - c.detection_mean.0;
    let dt = wrap_pi(rel.bearing - c.detection_mean.1);
    (-0.5 * (dr * dr / vr + dt * dt / vt)).exp() / (TAU * (vr * vt).sqrt())
}

/// Multiplies weights by `likelihood + LIKELIHOOD_FLOOR` and renormalizes.
fn reweight(b: &mut Belief, likelihood: impl Fn(&Position2D) -> f64 + Sync) {
    use rayon::prelude::*;
    b.particles_mut()
        .par_iter_mut()
        .with_min_len(64)
        .for_each(|p| p.weight *= likelihood(&p.pose.position()) + LIKELIHOOD_FLOOR);
    if !b.normalize() {
        b.set_uniform();
    }
}

/// Fuses a detection message into the receiver's belief.
pub fn fuse(b: &mut Belief, msg: &BeliefSummary, model: &DetectionModel) -> Result<(), FusionError> {
    let rb = ReceivedBelief::from_summary(msg, model)?;
    fuse_received(b, &rb);
    Ok(())
}

/// Same as [`fuse`] once the message has been turned into receiver terms.
pub fn fuse_received(b: &mut Belief, rb: &ReceivedBelief) {
    match rb {
        ReceivedBelief::Points { centers, sigma } => fuse_with_points(b, centers, sigma),
        other => reweight(b, |x| other.likelihood(x)),
    }
}

/// Point-mixture fusion shared by full and thinned particle sets and coresets.
pub fn fuse_with_points(b: &mut Belief, centers: &[Position2D], sigma: &Cov2) {
    reweight(b, |x| point_mixture(x, centers, sigma));
}

fn gaussian_draw<R: Rng + ?Sized>(mean: &Position2D, cov: &Cov2, rng: &mut R) -> Position2D {
    // Cholesky of [xx xy; xy yy]
    let l11 = cov.xx.max(0.0).sqrt();
    let l21 = if l11 > 0.0 { cov.xy / l11 } else { 0.0 };
    let l22 = (cov.yy - l21 * l21).max(0.0).sqrt();
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    Position2D::new(mean.x + l11 * z1, mean.y + l21 * z1 + l22 * z2)
}

/// One position drawn from the message's detection distribution.
pub fn draw_from<R: Rng + ?Sized>(rb: &ReceivedBelief, rng: &mut R) -> Result<Position2D, FusionError> {
    match rb {
        ReceivedBelief::Points { centers, sigma } => {
            let c = centers[rng.random_range(0..centers.len())];
            Ok(gaussian_draw(&c, sigma, rng))
        }
        ReceivedBelief::Mixture { clusters, sigma } => {
            let k = pick_component(clusters.iter().map(|c| c.weight), rng);
            let c = &clusters[k];
            Ok(gaussian_draw(&c.mean, &c.cov.add(sigma), rng))
        }
        ReceivedBelief::Polar { clusters, model } => {
            let k = pick_component(clusters.iter().map(|c| c.weight), rng);
            let c = &clusters[k];
            let (nr, nt) = model.polar(c.detection_mean.0);
            let r = c.detection_mean.0 + (c.detection_var.0 + nr).sqrt() * rng.sample::<f64, _>(StandardNormal);
            let t = c.detection_mean.1 + (c.detection_var.1 + nt).sqrt() * rng.sample::<f64, _>(StandardNormal);
            Ok(to_absolute(&Detection::new(r.max(0.0), t), &c.centroid))
        }
        ReceivedBelief::Density(_) => Err(FusionError::NoReciprocal(Method::Det)),
    }
}

fn pick_component<R: Rng + ?Sized>(weights: impl Iterator<Item = f64>, rng: &mut R) -> usize {
    let w: Vec<f64> = weights.map(|w| w.max(0.0)).collect();
    match WeightedIndex::new(&w) {
        Ok(d) => d.sample(rng),
        Err(_) => rng.random_range(0..w.len()),
    }
}

/// Resampling with injection: each of the `N` output slots is, with probability
/// `alpha`, a fresh draw from the message (uniform heading); the remaining slots
/// are filled by low-variance resampling of `b`. Output weights are `1/N`.
pub fn reciprocal_sample<R: Rng + ?Sized>(
    b: &Belief,
    rb: &ReceivedBelief,
    alpha: f64,
    rng: &mut R,
) -> Result<Belief, FusionError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(FusionError::BadAlpha(alpha));
    }
    if let ReceivedBelief::Density(_) = rb {
        return Err(FusionError::NoReciprocal(Method::Det));
    }
    if alpha == 0.0 {
        return Ok(resample_low_variance(b, rng));
    }
    let n = b.len();
    let inject: Vec<bool> = (0..n).map(|_| rng.random::<f64>() < alpha).collect();
    let kept = inject.iter().filter(|i| !**i).count();
    let picks = if kept > 0 {
        systematic_indices(b, kept, rng.random::<f64>())
    } else {
        Vec::new()
    };
    let w = 1.0 / n as f64;
    let mut picks = picks.into_iter();
    let mut out = Vec::with_capacity(n);
    for slot in inject {
        if slot {
            let p = draw_from(rb, rng)?;
            let theta = rng.random_range(0.0..TAU);
            out.push(Particle::new(Pose::new(p.x, p.y, theta), w));
        } else {
            let i = picks.next().expect("one pick per kept slot");
            out.push(Particle::new(b.particles()[i].pose, w));
        }
    }
    Ok(Belief::new(out)?)
}

/// Sender-side message construction for one detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SummaryConfig {
    pub compression: CompressionConfig,
    pub kernel: KernelConfig,
}

/// Builds the message robot `sender` sends after detecting another robot at `d`.
///
/// Methods that treat particles as equal-weight samples work on a low-variance
/// resampled copy when the belief is not already uniform; the sender's own
/// filter is left untouched.
pub fn summarize<R: Rng + ?Sized>(
    b: &Belief,
    d: &Detection,
    method: Method,
    cfg: &SummaryConfig,
    sender: u8,
    seq: u32,
    rng: &mut R,
) -> Result<BeliefSummary, FusionError> {
    let c = &cfg.compression;
    c.validate()?;
    let uniform;
    let equal = if b.has_uniform_weights() {
        b
    } else {
        uniform = resample_low_variance(b, rng);
        &uniform
    };
    let pose_record = |p: &Pose| PoseRecord {
        x: p.x as f32,
        y: p.y as f32,
        theta: p.theta as f32,
    };
    let payload = match method {
        Method::Naive => Payload::Poses(equal.particles().iter().map(|p| pose_record(&p.pose)).collect()),
        Method::StdThinning => {
            let k = c.thinning_k.min(equal.len());
            Payload::Poses(
                index::sample(rng, equal.len(), k)
                    .into_iter()
                    .map(|i| pose_record(&equal.particles()[i].pose))
                    .collect(),
            )
        }
        Method::Kmeans => {
            let s = project_samples(equal, d);
            let k = c.k_clusters.min(s.len());
            Payload::Clusters(
                kmeans_cluster(&s, k, c.kmeans_iters, rng)?
                    .iter()
                    .map(|g| ClusterRecord {
                        cx: g.mean.x as f32,
                        cy: g.mean.y as f32,
                        cxx: g.cov.xx as f32,
                        cxy: g.cov.xy as f32,
                        cyy: g.cov.yy as f32,
                        w: g.weight as f32,
                    })
                    .collect(),
            )
        }
        Method::Prorok => {
            // the clustering needs a power of two not above the particle count
            let mut k = c.k_clusters.next_power_of_two();
            while k > b.len() {
                k /= 2;
            }
            Payload::Abstractions(
                dnc_cluster(b, d, k)?
                    .iter()
                    .map(|a| AbstractionRecord {
                        cx: a.centroid.x as f32,
                        cy: a.centroid.y as f32,
                        ctheta: a.centroid.theta as f32,
                        w: a.weight as f32,
                        mu_r: a.detection_mean.0 as f32,
                        mu_theta: a.detection_mean.1 as f32,
                        var_r: a.detection_var.0 as f32,
                        var_theta: a.detection_var.1 as f32,
                    })
                    .collect(),
            )
        }
        Method::Det => Payload::Tree(tree_to_records(&build_det(&project_samples(equal, d), c)?)),
        Method::Compresspp => {
            let s = project_samples(equal, d);
            Payload::Points(
                compresspp(&s, c, &cfg.kernel, rng)?
                    .points()
                    .iter()
                    .map(|p| PointRecord {
                        x: p.x as f32,
                        y: p.y as f32,
                    })
                    .collect(),
            )
        }
    };
    Ok(BeliefSummary {
        method,
        sender,
        seq,
        range: d.range as f32,
        bearing: d.bearing as f32,
        payload,
    })
}

/// Receiver step on message arrival: fuse, then resample with reciprocal
/// injection when the effective sample size has dropped below `threshold · N`.
/// Returns whether a resampling happened.
pub fn receive<R: Rng + ?Sized>(
    b: &mut Belief,
    msg: &BeliefSummary,
    model: &DetectionModel,
    strategy: &FusionStrategy,
    threshold: f64,
    rng: &mut R,
) -> Result<bool, FusionError> {
    if msg.method != strategy.method {
        return Err(FusionError::WrongMethod {
            expected: strategy.method,
            got: msg.method,
        });
    }
    let rb = ReceivedBelief::from_summary(msg, model)?;
    fuse_received(b, &rb);
    if crate::mcl::effective_sample_size(b) >= threshold * b.len() as f64 {
        return Ok(false);
    }
    *b = if strategy.alpha > 0.0 {
        reciprocal_sample(b, &rb, strategy.alpha, rng)?
    } else {
        resample_low_variance(b, rng)
    };
    Ok(true)
}
