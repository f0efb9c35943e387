use crate::fusion::{fuse_received, summarize, DetectionModel, ReceivedBelief, SummaryConfig};
use crate::geometry::{Detection, Pose};
use crate::mcl::{Belief, Particle};
use crate::numeric::median;
use crate::wire::{decode, encode, Method};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub methods: Vec<Method>,
    pub n_particles: Vec<usize>,
    /// Timed repetitions per cell; the reported figure is their median.
    pub repeats: usize,
    /// Untimed repetitions run first.
    pub warmup: usize,
    /// Worker threads for the fusion step (1 measures the algorithmic cost).
    pub threads: usize,
    pub seed: u64,
    pub summary: SummaryConfig,
    pub detection_model: DetectionModel,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            methods: Method::ALL.to_vec(),
            n_particles: vec![1000, 10000],
            repeats: 5,
            warmup: 1,
            threads: 1,
            seed: 7,
            summary: SummaryConfig::default(),
            detection_model: DetectionModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: Method,
    pub n_particles: usize,
    /// Median sender cost: summarize and encode (ms).
    pub compression_ms: f64,
    /// Median receiver cost: decode and fuse (ms).
    pub fusion_ms: f64,
    pub bytes: usize,
}

const DETECTION: Detection = Detection {
    range: 2.0,
    bearing: 0.3,
};

/// Sender belief: a localized cluster with unequal weights, so methods that
/// need equal weights pay for their resampling.
fn sender_belief(n: usize, rng: &mut ChaCha8Rng) -> Belief {
    let parts = (0..n)
        .map(|_| {
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            let dt: f64 = rng.sample(StandardNormal);
            Particle::new(
                Pose::new(2.0 + 0.3 * dx, 3.0 + 0.3 * dy, 0.5 + 0.1 * dt),
                rng.random_range(0.5..1.5),
            )
        })
        .collect();
    let mut b = Belief::new(parts).expect("nonempty");
    b.normalize();
    b
}

/// Receiver belief: spread over a 10 m × 10 m square.
fn receiver_belief(n: usize, rng: &mut ChaCha8Rng) -> Belief {
    Belief::from_poses((0..n).map(|_| {
        Pose::new(
            rng.random_range(-2.0..8.0),
            rng.random_range(-2.0..8.0),
            rng.random_range(0.0..std::f64::consts::TAU),
        )
    }))
    .expect("nonempty")
}

/// Wall-clock ms of one receiver update (decode, interpret, fuse) for `bytes`,
/// run on the calling thread's rayon pool.
pub fn time_fusion(bytes: &[u8], receiver: &Belief, model: &DetectionModel) -> f64 {
    let mut b = receiver.clone();
    let start = Instant::now();
    let msg = decode(bytes).expect("benchmark message decodes");
    let rb = ReceivedBelief::from_summary(&msg, model).expect("benchmark message is valid");
    fuse_received(&mut b, &rb);
    let ms = start.elapsed().as_secs_f64() * 1e3;
    std::hint::black_box(&b);
    ms
}

/// Median sender and receiver costs per method and particle count.
pub fn benchmark(cfg: &BenchConfig) -> Vec<BenchRow> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| {
        let mut rows = Vec::new();
        for &n in &cfg.n_particles {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ n as u64);
            let sender = sender_belief(n, &mut rng);
            let receiver = receiver_belief(n, &mut rng);
            for &method in &cfg.methods {
                let mut comp = Vec::with_capacity(cfg.repeats);
                let mut fuse = Vec::with_capacity(cfg.repeats);
                let mut bytes = 0;
                for rep in 0..cfg.warmup + cfg.repeats.max(1) {
                    let start = Instant::now();
                    let msg = summarize(&sender, &DETECTION, method, &cfg.summary, 0, rep as u32, &mut rng)
                        .expect("benchmark summary");
                    let encoded = encode(&msg).expect("benchmark message encodes");
                    let c = start.elapsed().as_secs_f64() * 1e3;
                    let f = time_fusion(&encoded, &receiver, &cfg.detection_model);
                    bytes = encoded.len();
                    if rep >= cfg.warmup {
                        comp.push(c);
                        fuse.push(f);
                    }
                }
                rows.push(BenchRow {
                    method,
                    n_particles: n,
                    compression_ms: median(&comp).unwrap_or(0.0),
                    fusion_ms: median(&fuse).unwrap_or(0.0),
                    bytes,
                });
            }
        }
        rows
    })
}
