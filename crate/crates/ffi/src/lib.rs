//! C ABI over the belief exchange: build beliefs, summarize them into wire
//! messages, and fuse received messages.
//!
//! Every function returns a [`CmclStatus`]; results come back through out
//! parameters. Handles are opaque and must be released with their `_free`
//! function. A description of the last failure on the calling thread is
//! available from [`cmcl_last_error`].

use cmcl_core::fusion::{receive, summarize, DetectionModel, FusionStrategy, SummaryConfig};
use cmcl_core::geometry::{Detection, Pose};
use cmcl_core::mcl::{estimate_pose, Belief, Particle};
use cmcl_core::wire::{decode, encode, Method};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmclStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Decode = 3,
    Compression = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Weighted particle set.
pub struct CmclBelief {
    inner: Belief,
}

/// Encoded detection message.
pub struct CmclMessage {
    bytes: Vec<u8>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl ToString) {
    let text = CString::new(msg.to_string().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = text);
}

fn fail(status: CmclStatus, msg: impl ToString) -> CmclStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning a panic into [`CmclStatus::Panic`].
fn guard(f: impl FnOnce() -> CmclStatus) -> CmclStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(CmclStatus::Panic, "internal panic"),
    }
}

/// Description of the most recent failure on this thread (empty when none).
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cmcl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a belief from `n` poses laid out as `x, y, theta` triples.
/// `weights` may be null for equal weights; otherwise it holds `n` values.
///
/// # Safety
/// `poses` must point to `3 * n` doubles, `weights` to `n` doubles or be null,
/// and `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn cmcl_belief_new(
    poses: *const f64,
    weights: *const f64,
    n: usize,
    out: *mut *mut CmclBelief,
) -> CmclStatus {
    guard(|| {
        if poses.is_null() || out.is_null() {
            return fail(CmclStatus::NullPointer, "poses and out must not be null");
        }
        if n == 0 {
            return fail(CmclStatus::InvalidArgument, "belief needs at least one particle");
        }
        let p = std::slice::from_raw_parts(poses, 3 * n);
        let w = (!weights.is_null()).then(|| std::slice::from_raw_parts(weights, n));
        let particles: Vec<Particle> = (0..n)
            .map(|i| {
                Particle::new(
                    Pose::new(p[3 * i], p[3 * i + 1], p[3 * i + 2]),
                    w.map_or(1.0 / n as f64, |w| w[i]),
                )
            })
            .collect();
        match Belief::new(particles) {
            Ok(mut b) => {
                if !b.normalize() {
                    return fail(CmclStatus::InvalidArgument, "weights must have a positive finite sum");
                }
                *out = Box::into_raw(Box::new(CmclBelief { inner: b }));
                CmclStatus::Ok
            }
            Err(e) => fail(CmclStatus::InvalidArgument, e),
        }
    })
}

/// # Safety
/// `belief` must come from [`cmcl_belief_new`] and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cmcl_belief_free(belief: *mut CmclBelief) {
    if !belief.is_null() {
        drop(Box::from_raw(belief));
    }
}

/// # Safety
/// `belief` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn cmcl_belief_len(belief: *const CmclBelief, out: *mut usize) -> CmclStatus {
    guard(|| {
        let (Some(b), false) = (belief.as_ref(), out.is_null()) else {
            return fail(CmclStatus::NullPointer, "belief and out must not be null");
        };
        *out = b.inner.len();
        CmclStatus::Ok
    })
}

/// Copies the particles as `x, y, theta, weight` quadruples into `out`, which
/// holds room for `capacity` particles.
///
/// # Safety
/// `belief` must be a live handle and `out` must point to `4 * capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn cmcl_belief_particles(
    belief: *const CmclBelief,
    out: *mut f64,
    capacity: usize,
) -> CmclStatus {
    guard(|| {
        let (Some(b), false) = (belief.as_ref(), out.is_null()) else {
            return fail(CmclStatus::NullPointer, "belief and out must not be null");
        };
        let parts = b.inner.particles();
        if capacity < parts.len() {
            return fail(
                CmclStatus::BufferTooSmall,
                format!("{} particles do not fit in {capacity}", parts.len()),
            );
        }
        let dst = std::slice::from_raw_parts_mut(out, 4 * parts.len());
        for (chunk, p) in dst.chunks_exact_mut(4).zip(parts) {
            chunk.copy_from_slice(&[p.pose.x, p.pose.y, p.pose.theta, p.weight]);
        }
        CmclStatus::Ok
    })
}

/// Weighted-mean pose as `x, y, theta`.
///
/// # Safety
/// `belief` must be a live handle and `out` must point to 3 doubles.
#[no_mangle]
pub unsafe extern "C" fn cmcl_belief_estimate(belief: *const CmclBelief, out: *mut f64) -> CmclStatus {
    guard(|| {
        let (Some(b), false) = (belief.as_ref(), out.is_null()) else {
            return fail(CmclStatus::NullPointer, "belief and out must not be null");
        };
        let pose = estimate_pose(&b.inner);
        std::slice::from_raw_parts_mut(out, 3).copy_from_slice(&[pose.x, pose.y, pose.theta]);
        CmclStatus::Ok
    })
}

fn method_from_tag(tag: u8) -> Result<Method, CmclStatus> {
    Method::from_tag(tag).ok_or_else(|| fail(CmclStatus::InvalidArgument, format!("unknown method tag {tag}")))
}

/// Builds the message a robot sends after detecting another robot at
/// (`range`, `bearing`) relative to itself. `method` is the wire tag
/// (0 naive, 1 std_thinning, 2 det, 3 prorok, 4 kmeans, 5 compresspp).
/// Randomized methods draw from a generator seeded with `seed`.
///
/// # Safety
/// `sender` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn cmcl_summarize(
    sender: *const CmclBelief,
    range: f64,
    bearing: f64,
    method: u8,
    seed: u64,
    out: *mut *mut CmclMessage,
) -> CmclStatus {
    guard(|| {
        let (Some(b), false) = (sender.as_ref(), out.is_null()) else {
            return fail(CmclStatus::NullPointer, "sender and out must not be null");
        };
        let method = match method_from_tag(method) {
            Ok(m) => m,
            Err(s) => return s,
        };
        if !(range.is_finite() && range >= 0.0 && bearing.is_finite()) {
            return fail(
                CmclStatus::InvalidArgument,
                "detection must be finite with nonnegative range",
            );
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let msg = match summarize(
            &b.inner,
            &Detection::new(range, bearing),
            method,
            &SummaryConfig::default(),
            0,
            0,
            &mut rng,
        ) {
            Ok(m) => m,
            Err(e) => return fail(CmclStatus::Compression, e),
        };
        match encode(&msg) {
            Ok(bytes) => {
                *out = Box::into_raw(Box::new(CmclMessage { bytes }));
                CmclStatus::Ok
            }
            Err(e) => fail(CmclStatus::Compression, e),
        }
    })
}

/// Wraps received bytes after checking that they decode.
///
/// # Safety
/// `bytes` must point to `len` bytes and `out` be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn cmcl_message_from_bytes(
    bytes: *const u8,
    len: usize,
    out: *mut *mut CmclMessage,
) -> CmclStatus {
    guard(|| {
        if bytes.is_null() || out.is_null() {
            return fail(CmclStatus::NullPointer, "bytes and out must not be null");
        }
        let data = std::slice::from_raw_parts(bytes, len).to_vec();
        if let Err(e) = decode(&data) {
            return fail(CmclStatus::Decode, e);
        }
        *out = Box::into_raw(Box::new(CmclMessage { bytes: data }));
        CmclStatus::Ok
    })
}

/// Encoded size of `msg` in bytes.
///
/// # Safety
/// `msg` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn cmcl_message_len(msg: *const CmclMessage, out: *mut usize) -> CmclStatus {
    guard(|| {
        let (Some(m), false) = (msg.as_ref(), out.is_null()) else {
            return fail(CmclStatus::NullPointer, "msg and out must not be null");
        };
        *out = m.bytes.len();
        CmclStatus::Ok
    })
}

/// Copies the encoded message into `buf` (room for `capacity` bytes).
///
/// # Safety
/// `msg` must be a live handle and `buf` must point to `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cmcl_message_bytes(msg: *const CmclMessage, buf: *mut u8, capacity: usize) -> CmclStatus {
    guard(|| {
        let (Some(m), false) = (msg.as_ref(), buf.is_null()) else {
            return fail(CmclStatus::NullPointer, "msg and buf must not be null");
        };
        if capacity < m.bytes.len() {
            return fail(
                CmclStatus::BufferTooSmall,
                format!("message needs {} bytes, buffer holds {capacity}", m.bytes.len()),
            );
        }
        std::slice::from_raw_parts_mut(buf, m.bytes.len()).copy_from_slice(&m.bytes);
        CmclStatus::Ok
    })
}

/// # Safety
/// `msg` must come from this library and not be used afterwards; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cmcl_message_free(msg: *mut CmclMessage) {
    if !msg.is_null() {
        drop(Box::from_raw(msg));
    }
}

/// Fuses `msg` into `receiver` with the default detection model, then
/// resamples with reciprocal injection probability `alpha` when the effective
/// sample size drops below half the particle count. `resampled` (may be null)
/// receives 1 when that happened.
///
/// # Safety
/// `receiver` and `msg` must be live handles; `resampled` null or valid for a write.
#[no_mangle]
pub unsafe extern "C" fn cmcl_fuse(
    receiver: *mut CmclBelief,
    msg: *const CmclMessage,
    alpha: f64,
    seed: u64,
    resampled: *mut i32,
) -> CmclStatus {
    guard(|| {
        let (Some(b), Some(m)) = (receiver.as_mut(), msg.as_ref()) else {
            return fail(CmclStatus::NullPointer, "receiver and msg must not be null");
        };
        let summary = match decode(&m.bytes) {
            Ok(s) => s,
            Err(e) => return fail(CmclStatus::Decode, e),
        };
        let strategy = match FusionStrategy::new(summary.method, alpha) {
            Ok(s) => s,
            Err(e) => return fail(CmclStatus::InvalidArgument, e),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut next = b.inner.clone();
        match receive(
            &mut next,
            &summary,
            &DetectionModel::default(),
            &strategy,
            0.5,
            &mut rng,
        ) {
            Ok(did) => {
                b.inner = next;
                if !resampled.is_null() {
                    *resampled = did as i32;
                }
                CmclStatus::Ok
            }
            Err(e) => fail(CmclStatus::InvalidArgument, e),
        }
    })
}
