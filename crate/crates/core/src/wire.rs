//! Little-endian byte layout of belief summaries exchanged between robots.
//!
//! Header (18 bytes): method tag `u8`, sender `u8`, sequence `u32`, detection
//! range `f32`, detection bearing `f32`, record count `u32`. The payload follows
//! as `count` fixed-size records whose layout depends on the method.

use crate::compress::{BBox, DensityTree, DetNode, DetSplit};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub const HEADER_LEN: usize = 18;
pub const POSE_RECORD_LEN: usize = 12;
pub const CLUSTER_RECORD_LEN: usize = 24;
pub const ABSTRACTION_RECORD_LEN: usize = 32;
pub const DET_RECORD_LEN: usize = 50;
pub const POINT_RECORD_LEN: usize = 8;

/// Child reference bit marking a leaf index inside a tree record.
pub const LEAF_BIT: u32 = 0x8000_0000;
/// Record flag: the record also carries an internal node.
pub const FLAG_INTERNAL: u8 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum WireError {
    #[error("buffer ends at byte {offset}, {needed} more bytes needed")]
    Truncated { offset: usize, needed: usize },
    #[error("unknown method tag {tag} at byte {offset}")]
    UnknownMethod { offset: usize, tag: u8 },
    #[error("{extra} unexpected trailing bytes at byte {offset}")]
    TrailingBytes { offset: usize, extra: usize },
    #[error("non-finite float at byte {offset}")]
    NonFinite { offset: usize },
    #[error("payload of {count} records does not fit a u32 count")]
    TooManyRecords { count: usize },
    #[error("{method} message carries a {payload} payload")]
    MethodMismatch { method: Method, payload: &'static str },
    #[error("malformed tree record {index}: {reason}")]
    BadTree { index: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum Method {
    Naive = 0,
    StdThinning = 1,
    Det = 2,
    Prorok = 3,
    Kmeans = 4,
    Compresspp = 5,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Naive,
        Method::StdThinning,
        Method::Det,
        Method::Prorok,
        Method::Kmeans,
        Method::Compresspp,
    ];

    pub fn from_tag(tag: u8) -> Option<Method> {
        Method::ALL.get(tag as usize).copied()
    }

    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Naive => "naive",
            Method::StdThinning => "std_thinning",
            Method::Det => "det",
            Method::Prorok => "prorok",
            Method::Kmeans => "kmeans",
            Method::Compresspp => "compresspp",
        }
    }

    pub fn from_name(name: &str) -> Option<Method> {
        let name = name.trim().to_ascii_lowercase();
        let name = match name.as_str() {
            "dnc" => "prorok",
            "compress++" => "compresspp",
            other => other,
        };
        Method::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Bytes per payload record.
    pub fn record_len(self) -> usize {
        match self {
            Method::Naive | Method::StdThinning => POSE_RECORD_LEN,
            Method::Kmeans => CLUSTER_RECORD_LEN,
            Method::Prorok => ABSTRACTION_RECORD_LEN,
            Method::Det => DET_RECORD_LEN,
            Method::Compresspp => POINT_RECORD_LEN,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sender particle pose.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PoseRecord {
    pub x: f32,
    pub y: f32,
    pub theta: f32,
}

/// World-frame Gaussian cluster: center, covariance entries, weight.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub cx: f32,
    pub cy: f32,
    pub cxx: f32,
    pub cxy: f32,
    pub cyy: f32,
    pub w: f32,
}

/// Sender cluster pose with polar detection statistics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AbstractionRecord {
    pub cx: f32,
    pub cy: f32,
    pub ctheta: f32,
    pub w: f32,
    pub mu_r: f32,
    pub mu_theta: f32,
    pub var_r: f32,
    pub var_theta: f32,
}

/// One 50-byte tree record. Every record describes a leaf (box and density);
/// records flagged [`FLAG_INTERNAL`] also describe internal node `i`, whose
/// children are internal indices or leaf indices tagged with [`LEAF_BIT`].
/// A tree with `T` leaves has `T - 1` internal nodes, so `T` records suffice.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DetRecord {
    /// `xmin, xmax, ymin, ymax`
    pub bbox: [f32; 4],
    pub density: f32,
    pub split_dim: u8,
    pub split_value: f32,
    pub children: [u32; 2],
    pub flags: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PointRecord {
    pub x: f32,
    pub y: f32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Payload {
    Poses(Vec<PoseRecord>),
    Clusters(Vec<ClusterRecord>),
    Abstractions(Vec<AbstractionRecord>),
    Tree(Vec<DetRecord>),
    Points(Vec<PointRecord>),
}

impl Payload {
    pub fn len(&self) -> usize {
        match self {
            Payload::Poses(v) => v.len(),
            Payload::Clusters(v) => v.len(),
            Payload::Abstractions(v) => v.len(),
            Payload::Tree(v) => v.len(),
            Payload::Points(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn kind(&self) -> &'static str {
        match self {
            Payload::Poses(_) => "pose",
            Payload::Clusters(_) => "cluster",
            Payload::Abstractions(_) => "abstraction",
            Payload::Tree(_) => "tree",
            Payload::Points(_) => "point",
        }
    }

    fn fits(&self, method: Method) -> bool {
        matches!(
            (method, self),
            (Method::Naive | Method::StdThinning, Payload::Poses(_))
                | (Method::Kmeans, Payload::Clusters(_))
                | (Method::Prorok, Payload::Abstractions(_))
                | (Method::Det, Payload::Tree(_))
                | (Method::Compresspp, Payload::Points(_))
        )
    }
}

/// Detection message from `sender` about the robot it saw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefSummary {
    pub method: Method,
    pub sender: u8,
    pub seq: u32,
    pub range: f32,
    pub bearing: f32,
    pub payload: Payload,
}

impl BeliefSummary {
    pub fn check(&self) -> Result<(), WireError> {
        if !self.payload.fits(self.method) {
            return Err(WireError::MethodMismatch {
                method: self.method,
                payload: self.payload.kind(),
            });
        }
        if self.payload.len() > u32::MAX as usize {
            return Err(WireError::TooManyRecords {
                count: self.payload.len(),
            });
        }
        Ok(())
    }

    /// Payload size in bytes, header excluded.
    pub fn payload_len(&self) -> usize {
        self.payload.len() * self.method.record_len()
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.payload_len()
    }
}

fn put_f32s(out: &mut Vec<u8>, vals: &[f32]) {
    for v in vals {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode(msg: &BeliefSummary) -> Result<Vec<u8>, WireError> {
    msg.check()?;
    let mut out = Vec::with_capacity(msg.encoded_len());
    out.push(msg.method.tag());
    out.push(msg.sender);
    out.extend_from_slice(&msg.seq.to_le_bytes());
    put_f32s(&mut out, &[msg.range, msg.bearing]);
    out.extend_from_slice(&(msg.payload.len() as u32).to_le_bytes());
    match &msg.payload {
        Payload::Poses(v) => v.iter().for_each(|r| put_f32s(&mut out, &[r.x, r.y, r.theta])),
        Payload::Clusters(v) => v
            .iter()
            .for_each(|r| put_f32s(&mut out, &[r.cx, r.cy, r.cxx, r.cxy, r.cyy, r.w])),
        Payload::Abstractions(v) => v.iter().for_each(|r| {
            put_f32s(
                &mut out,
                &[r.cx, r.cy, r.ctheta, r.w, r.mu_r, r.mu_theta, r.var_r, r.var_theta],
            )
        }),
        Payload::Tree(v) => v.iter().for_each(|r| {
            put_f32s(&mut out, &r.bbox);
            put_f32s(&mut out, &[r.density]);
            out.push(r.split_dim);
            put_f32s(&mut out, &[r.split_value]);
            out.extend_from_slice(&r.children[0].to_le_bytes());
            out.extend_from_slice(&r.children[1].to_le_bytes());
            out.push(r.flags);
            out.extend_from_slice(&[0u8; 16]);
        }),
        Payload::Points(v) => v.iter().for_each(|r| put_f32s(&mut out, &[r.x, r.y])),
    }
    debug_assert_eq!(out.len(), msg.encoded_len());
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.buf.len() - self.pos < n {
            return Err(WireError::Truncated {
                offset: self.buf.len(),
                needed: n - (self.buf.len() - self.pos),
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, WireError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f32(&mut self) -> Result<f32, WireError> {
        let offset = self.pos;
        let v = f32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes"));
        if !v.is_finite() {
            return Err(WireError::NonFinite { offset });
        }
        Ok(v)
    }

    fn f32s<const N: usize>(&mut self) -> Result<[f32; N], WireError> {
        let mut out = [0.0; N];
        for v in &mut out {
            *v = self.f32()?;
        }
        Ok(out)
    }
}

pub fn decode(bytes: &[u8]) -> Result<BeliefSummary, WireError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let tag = r.u8()?;
    let method = Method::from_tag(tag).ok_or(WireError::UnknownMethod { offset: 0, tag })?;
    let sender = r.u8()?;
    let seq = r.u32()?;
    let [range, bearing] = r.f32s()?;
    let count = r.u32()? as usize;
    // check the length up front so a bogus count cannot trigger a huge allocation
    let needed = count.saturating_mul(method.record_len());
    if bytes.len() - r.pos < needed {
        return Err(WireError::Truncated {
            offset: bytes.len(),
            needed: needed - (bytes.len() - r.pos),
        });
    }
    let payload = match method {
        Method::Naive | Method::StdThinning => Payload::Poses(
            (0..count)
                .map(|_| r.f32s().map(|[x, y, theta]| PoseRecord { x, y, theta }))
                .collect::<Result<_, _>>()?,
        ),
        Method::Kmeans => Payload::Clusters(
            (0..count)
                .map(|_| {
                    r.f32s().map(|[cx, cy, cxx, cxy, cyy, w]| ClusterRecord {
                        cx,
                        cy,
                        cxx,
                        cxy,
                        cyy,
                        w,
                    })
                })
                .collect::<Result<_, _>>()?,
        ),
        Method::Prorok => Payload::Abstractions(
            (0..count)
                .map(|_| {
                    r.f32s().map(
                        |[cx, cy, ctheta, w, mu_r, mu_theta, var_r, var_theta]| AbstractionRecord {
                            cx,
                            cy,
                            ctheta,
                            w,
                            mu_r,
                            mu_theta,
                            var_r,
                            var_theta,
                        },
                    )
                })
                .collect::<Result<_, _>>()?,
        ),
        Method::Det => Payload::Tree(
            (0..count)
                .map(|_| -> Result<DetRecord, WireError> {
                    let bbox = r.f32s()?;
                    let density = r.f32()?;
                    let split_dim = r.u8()?;
                    let split_value = r.f32()?;
                    let children = [r.u32()?, r.u32()?];
                    let flags = r.u8()?;
                    r.take(16)?;
                    Ok(DetRecord {
                        bbox,
                        density,
                        split_dim,
                        split_value,
                        children,
                        flags,
                    })
                })
                .collect::<Result<_, _>>()?,
        ),
        Method::Compresspp => Payload::Points(
            (0..count)
                .map(|_| r.f32s().map(|[x, y]| PointRecord { x, y }))
                .collect::<Result<_, _>>()?,
        ),
    };
    if r.pos != bytes.len() {
        return Err(WireError::TrailingBytes {
            offset: r.pos,
            extra: bytes.len() - r.pos,
        });
    }
    Ok(BeliefSummary {
        method,
        sender,
        seq,
        range,
        bearing,
        payload,
    })
}

/// Packs a tree into one record per leaf, pairing internal node `i` with record `i`.
pub fn tree_to_records(t: &DensityTree) -> Vec<DetRecord> {
    let nodes = t.nodes();
    let mut leaf_of = vec![u32::MAX; nodes.len()];
    let mut internal_of = vec![u32::MAX; nodes.len()];
    let (mut leaves, mut internals) = (Vec::new(), Vec::new());
    // breadth-first so the root is internal node 0
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        match nodes[i].split {
            Some(s) => {
                internal_of[i] = internals.len() as u32;
                internals.push(i);
                queue.push_back(s.left);
                queue.push_back(s.right);
            }
            None => {
                leaf_of[i] = leaves.len() as u32;
                leaves.push(i);
            }
        }
    }
    let child_ref = |c: usize| {
        if nodes[c].is_leaf() {
            leaf_of[c] | LEAF_BIT
        } else {
            internal_of[c]
        }
    };
    leaves
        .iter()
        .enumerate()
        .map(|(k, &leaf)| {
            let b = nodes[leaf].bbox;
            let mut rec = DetRecord {
                bbox: [b.xmin as f32, b.xmax as f32, b.ymin as f32, b.ymax as f32],
                density: nodes[leaf].density as f32,
                ..Default::default()
            };
            if let Some(&node) = internals.get(k) {
                let s = nodes[node].split.expect("internal node");
                rec.flags = FLAG_INTERNAL;
                rec.split_dim = s.dim;
                rec.split_value = s.value as f32;
                rec.children = [child_ref(s.left), child_ref(s.right)];
            }
            rec
        })
        .collect()
}

/// Rebuilds a tree from its records. Boxes are recomputed by cutting the union
/// of the leaf boxes, so the leaves tile the root exactly.
pub fn records_to_tree(records: &[DetRecord]) -> Result<DensityTree, WireError> {
    let bad = |index: usize, reason: &str| WireError::BadTree {
        index,
        reason: reason.to_string(),
    };
    let t = records.len();
    if t == 0 {
        return Err(bad(0, "empty tree"));
    }
    let internal_count = records.iter().take_while(|r| r.flags & FLAG_INTERNAL != 0).count();
    if internal_count != t - 1 || records[internal_count..].iter().any(|r| r.flags & FLAG_INTERNAL != 0) {
        return Err(bad(
            internal_count,
            "expected internal nodes on all but the last record",
        ));
    }
    let mut root = BBox::new(f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for r in records {
        root.xmin = root.xmin.min(r.bbox[0] as f64);
        root.xmax = root.xmax.max(r.bbox[1] as f64);
        root.ymin = root.ymin.min(r.bbox[2] as f64);
        root.ymax = root.ymax.max(r.bbox[3] as f64);
    }
    let leaf_node = |k: usize, bbox: BBox| DetNode {
        bbox,
        density: records[k].density as f64,
        split: None,
    };
    if t == 1 {
        return DensityTree::from_nodes(vec![leaf_node(0, root)]).map_err(|e| bad(0, &e.to_string()));
    }

    let mut nodes: Vec<DetNode> = Vec::with_capacity(2 * t - 1);
    let mut leaf_seen = vec![false; t];
    let mut internal_seen = vec![false; t - 1];
    internal_seen[0] = true;
    // (internal record index, node slot, box)
    let mut queue = std::collections::VecDeque::from([(0usize, 0usize, root)]);
    nodes.push(leaf_node(0, root));
    while let Some((rec_i, slot, bbox)) = queue.pop_front() {
        let r = &records[rec_i];
        if r.split_dim > 1 {
            return Err(bad(rec_i, "split axis must be 0 or 1"));
        }
        let value = r.split_value as f64;
        let (lo, hi) = bbox.span(r.split_dim);
        if !(value >= lo && value <= hi) {
            return Err(bad(rec_i, "split value outside the node box"));
        }
        let (lb, rb) = bbox.cut(r.split_dim, value);
        let mut kids = [0usize; 2];
        for (side, (&c, cb)) in r.children.iter().zip([lb, rb]).enumerate() {
            let idx = (c & !LEAF_BIT) as usize;
            let slot_c = nodes.len();
            if c & LEAF_BIT != 0 {
                if idx >= t || leaf_seen[idx] {
                    return Err(bad(rec_i, "leaf reference out of range or repeated"));
                }
                leaf_seen[idx] = true;
                nodes.push(leaf_node(idx, cb));
            } else {
                if idx >= t - 1 || internal_seen[idx] {
                    return Err(bad(rec_i, "internal reference out of range or repeated"));
                }
                internal_seen[idx] = true;
                nodes.push(leaf_node(0, cb));
                queue.push_back((idx, slot_c, cb));
            }
            kids[side] = slot_c;
        }
        nodes[slot].split = Some(DetSplit {
            dim: r.split_dim,
            value,
            left: kids[0],
            right: kids[1],
        });
    }
    if leaf_seen.iter().any(|s| !s) {
        return Err(bad(0, "unreferenced leaf"));
    }
    fill_internal_density(&mut nodes, 0);
    DensityTree::from_nodes(nodes).map_err(|e| bad(0, &e.to_string()))
}

/// Sets internal node densities to subtree mass over area; returns the mass.
fn fill_internal_density(nodes: &mut [DetNode], i: usize) -> f64 {
    let Some(s) = nodes[i].split else {
        return nodes[i].density * nodes[i].bbox.area();
    };
    let mass = fill_internal_density(nodes, s.left) + fill_internal_density(nodes, s.right);
    let area = nodes[i].bbox.area();
    nodes[i].density = if area > 0.0 { mass / area } else { 0.0 };
    mass
}

#[cfg(test)]
mod tests {
    use super::*;

    fn msg(method: Method, payload: Payload) -> BeliefSummary {
        BeliefSummary {
            method,
            sender: 3,
            seq: 77,
            range: 1.25,
            bearing: -0.5,
            payload,
        }
    }

    #[test]
    fn payload_sizes() {
        let m = msg(Method::Naive, Payload::Poses(vec![PoseRecord::default(); 10_000]));
        assert_eq!(m.payload_len(), 120_000);
        assert_eq!(encode(&m).unwrap().len(), HEADER_LEN + 120_000);
        let m = msg(Method::Kmeans, Payload::Clusters(vec![ClusterRecord::default(); 8]));
        assert_eq!(encode(&m).unwrap().len() - HEADER_LEN, 192);
        let m = msg(
            Method::Prorok,
            Payload::Abstractions(vec![AbstractionRecord::default(); 8]),
        );
        assert_eq!(encode(&m).unwrap().len() - HEADER_LEN, 256);
        let m = msg(Method::Det, Payload::Tree(vec![DetRecord::default(); 20]));
        assert_eq!(encode(&m).unwrap().len() - HEADER_LEN, 1000);
        let m = msg(Method::Compresspp, Payload::Points(vec![PointRecord::default(); 64]));
        assert_eq!(encode(&m).unwrap().len() - HEADER_LEN, 512);
    }

    #[test]
    fn round_trip_points() {
        let m = msg(
            Method::Compresspp,
            Payload::Points(vec![PointRecord { x: 1.5, y: -2.25 }, PointRecord { x: 0.1, y: 7.0 }]),
        );
        let bytes = encode(&m).unwrap();
        assert_eq!(decode(&bytes).unwrap(), m);
        assert_eq!(encode(&decode(&bytes).unwrap()).unwrap(), bytes);
    }

    #[test]
    fn truncation_and_bad_tag() {
        let m = msg(
            Method::Compresspp,
            Payload::Points(vec![PointRecord { x: 1.0, y: 2.0 }]),
        );
        let bytes = encode(&m).unwrap();
        assert_eq!(
            decode(&bytes[..bytes.len() - 3]),
            Err(WireError::Truncated {
                offset: bytes.len() - 3,
                needed: 3
            })
        );
        let mut bad = bytes.clone();
        bad[0] = 255;
        assert_eq!(decode(&bad), Err(WireError::UnknownMethod { offset: 0, tag: 255 }));
        let mut long = bytes;
        long.push(0);
        assert!(matches!(decode(&long), Err(WireError::TrailingBytes { .. })));
    }

    #[test]
    fn non_finite_rejected_with_offset() {
        let m = msg(
            Method::Compresspp,
            Payload::Points(vec![PointRecord { x: 1.0, y: 2.0 }]),
        );
        let mut bytes = encode(&m).unwrap();
        bytes[HEADER_LEN + 4..HEADER_LEN + 8].copy_from_slice(&f32::NAN.to_le_bytes());
        assert_eq!(decode(&bytes), Err(WireError::NonFinite { offset: HEADER_LEN + 4 }));
    }

    #[test]
    fn mismatched_payload_rejected() {
        let m = msg(Method::Kmeans, Payload::Points(vec![]));
        assert!(matches!(encode(&m), Err(WireError::MethodMismatch { .. })));
    }

    #[test]
    fn method_names() {
        for m in Method::ALL {
            assert_eq!(Method::from_name(m.name()), Some(m));
            assert_eq!(Method::from_tag(m.tag()), Some(m));
        }
        assert_eq!(Method::from_name("dnc"), Some(Method::Prorok));
        assert_eq!(Method::from_tag(6), None);
    }
}
