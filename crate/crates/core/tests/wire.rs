use cmcl_core::fusion::{summarize, SummaryConfig};
use cmcl_core::geometry::{Detection, Pose};
use cmcl_core::mcl::Belief;
use cmcl_core::wire::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn finite() -> impl Strategy<Value = f32> {
    -1e6f32..1e6f32
}

fn pose() -> impl Strategy<Value = PoseRecord> {
    (finite(), finite(), finite()).prop_map(|(x, y, theta)| PoseRecord { x, y, theta })
}

fn cluster() -> impl Strategy<Value = ClusterRecord> {
    prop::array::uniform6(finite()).prop_map(|[cx, cy, cxx, cxy, cyy, w]| ClusterRecord {
        cx,
        cy,
        cxx,
        cxy,
        cyy,
        w,
    })
}

fn abstraction() -> impl Strategy<Value = AbstractionRecord> {
    prop::array::uniform8(finite()).prop_map(|[cx, cy, ctheta, w, mu_r, mu_theta, var_r, var_theta]| {
        AbstractionRecord {
            cx,
            cy,
            ctheta,
            w,
            mu_r,
            mu_theta,
            var_r,
            var_theta,
        }
    })
}

fn point() -> impl Strategy<Value = PointRecord> {
    (finite(), finite()).prop_map(|(x, y)| PointRecord { x, y })
}

fn summary() -> impl Strategy<Value = BeliefSummary> {
    let payload = prop_oneof![
        (prop::bool::ANY, prop::collection::vec(pose(), 1..50)).prop_map(|(thin, v)| (
            if thin { Method::StdThinning } else { Method::Naive },
            Payload::Poses(v)
        )),
        prop::collection::vec(cluster(), 1..20).prop_map(|v| (Method::Kmeans, Payload::Clusters(v))),
        prop::collection::vec(abstraction(), 1..20).prop_map(|v| (Method::Prorok, Payload::Abstractions(v))),
        prop::collection::vec(point(), 1..70).prop_map(|v| (Method::Compresspp, Payload::Points(v))),
    ];
    (payload, any::<u8>(), any::<u32>(), 0f32..20.0, -3.2f32..3.2).prop_map(
        |((method, payload), sender, seq, range, bearing)| BeliefSummary {
            method,
            sender,
            seq,
            range,
            bearing,
            payload,
        },
    )
}

proptest! {
    #[test]
    fn round_trip_is_bit_exact(msg in summary()) {
        let bytes = encode(&msg).unwrap();
        prop_assert_eq!(bytes.len(), msg.encoded_len());
        let back = decode(&bytes).unwrap();
        prop_assert_eq!(&back, &msg);
        prop_assert_eq!(encode(&back).unwrap(), bytes);
    }

    #[test]
    fn every_truncation_is_rejected(msg in summary(), cut in 0usize..10_000) {
        let bytes = encode(&msg).unwrap();
        let cut = cut % bytes.len();
        let is_truncated = matches!(decode(&bytes[..cut]), Err(WireError::Truncated { .. }));
        prop_assert!(is_truncated);
    }

    #[test]
    fn trailing_bytes_are_rejected(msg in summary(), extra in 1usize..8) {
        let mut bytes = encode(&msg).unwrap();
        bytes.extend(std::iter::repeat_n(0u8, extra));
        let is_trailing = matches!(decode(&bytes), Err(WireError::TrailingBytes { .. }));
        prop_assert!(is_trailing);
    }
}

#[test]
fn tree_payload_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let b = Belief::from_poses((0..400).map(|i| {
        let t = i as f64;
        Pose::new((t * 0.37).sin() * 3.0, (t * 0.11).cos() * 2.0, 0.0)
    }))
    .unwrap();
    let msg = summarize(
        &b,
        &Detection::new(1.0, 0.0),
        Method::Det,
        &SummaryConfig::default(),
        0,
        0,
        &mut rng,
    )
    .unwrap();
    let Payload::Tree(records) = &msg.payload else {
        panic!("expected a tree payload")
    };
    assert_eq!(records.len(), 20);
    assert_eq!(records.iter().filter(|r| r.flags & FLAG_INTERNAL != 0).count(), 19);
    let bytes = encode(&msg).unwrap();
    assert_eq!(decode(&bytes).unwrap(), msg);
}

#[test]
fn header_fields_are_little_endian() {
    let msg = BeliefSummary {
        method: Method::Compresspp,
        sender: 3,
        seq: 0x0102_0304,
        range: 1.5,
        bearing: -0.25,
        payload: Payload::Points(vec![PointRecord { x: 1.0, y: 2.0 }]),
    };
    let bytes = encode(&msg).unwrap();
    assert_eq!(bytes.len(), HEADER_LEN + POINT_RECORD_LEN);
    assert_eq!(&bytes[..6], &[5, 3, 4, 3, 2, 1]);
    assert_eq!(&bytes[6..10], &1.5f32.to_le_bytes());
    assert_eq!(&bytes[14..18], &1u32.to_le_bytes());
}

#[test]
fn rejects_bad_input() {
    let mut bytes = encode(&BeliefSummary {
        method: Method::Naive,
        sender: 0,
        seq: 0,
        range: 1.0,
        bearing: 0.0,
        payload: Payload::Poses(vec![PoseRecord::default()]),
    })
    .unwrap();
    let mut unknown = bytes.clone();
    unknown[0] = 42;
    assert!(matches!(
        decode(&unknown),
        Err(WireError::UnknownMethod { tag: 42, .. })
    ));
    bytes[HEADER_LEN..HEADER_LEN + 4].copy_from_slice(&f32::NAN.to_le_bytes());
    assert!(matches!(decode(&bytes), Err(WireError::NonFinite { .. })));
    let mismatch = BeliefSummary {
        method: Method::Kmeans,
        sender: 0,
        seq: 0,
        range: 1.0,
        bearing: 0.0,
        payload: Payload::Points(vec![]),
    };
    assert!(matches!(encode(&mismatch), Err(WireError::MethodMismatch { .. })));
}
