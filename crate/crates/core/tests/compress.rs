use cmcl_core::compress::*;
use cmcl_core::geometry::{Detection, Pose, Position2D};
use cmcl_core::mcl::Belief;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn points(min: usize, max: usize) -> impl Strategy<Value = Vec<Position2D>> {
    prop::collection::vec((-20.0f64..20.0, -20.0f64..20.0), min..max)
        .prop_map(|v| v.into_iter().map(|(x, y)| Position2D::new(x, y)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn det_density_integrates_to_one(pts in points(2, 400)) {
        let tree = build_det(&PositionSamples::new(pts.clone()).unwrap(), &CompressionConfig::default()).unwrap();
        prop_assert!((tree.integral() - 1.0).abs() < 1e-6);
        prop_assert!(tree.leaf_count() <= 20);
        for p in &pts {
            prop_assert!(query_det(&tree, p) > 0.0);
        }
    }

    #[test]
    fn kmeans_weights_sum_to_one(pts in points(8, 300), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = PositionSamples::new(pts).unwrap();
        let cl = kmeans_cluster(&s, 8, 5, &mut rng).unwrap();
        prop_assert_eq!(cl.len(), 8);
        prop_assert!((cl.iter().map(|c| c.weight).sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(cl.iter().all(|c| c.cov.is_psd() && c.cov.det() > 0.0));
    }

    #[test]
    fn dnc_partitions_every_particle(pts in points(8, 300), k_pow in 0u32..4) {
        let k = 1usize << k_pow;
        let b = Belief::from_poses(pts.iter().map(|p| Pose::new(p.x, p.y, 0.3))).unwrap();
        let cells = dnc_partition(&b, k).unwrap();
        prop_assert!(cells.len() <= k);
        prop_assert_eq!(cells.iter().map(Vec::len).sum::<usize>(), pts.len());
        let cl = dnc_cluster(&b, &Detection::new(1.0, 0.5), k).unwrap();
        prop_assert!((cl.iter().map(|c| c.weight).sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn compresspp_size_and_membership(pts in points(4, 1200), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = PositionSamples::new(pts.clone()).unwrap();
        let c = compresspp(&s, &CompressionConfig::default(), &KernelConfig::default(), &mut rng).unwrap();
        prop_assert_eq!(c.len(), compresspp_output_size(pts.len()));
        prop_assert!(c.points().iter().all(|p| pts.contains(p)));
    }

    #[test]
    fn mmd_is_a_symmetric_nonnegative_discrepancy(a in points(1, 60), b in points(1, 60), h in 0.1f64..5.0) {
        let (sa, sb) = (PositionSamples::new(a).unwrap(), PositionSamples::new(b).unwrap());
        let k = KernelConfig::fixed(h);
        let ab = mmd(&sa, &sb, &k).unwrap();
        let ba = mmd(&sb, &sa, &k).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!(mmd(&sa, &sa, &k).unwrap() < 1e-6);
    }
}

#[test]
fn output_sizes_follow_powers_of_four() {
    for (n, want) in [
        (4, 2),
        (15, 2),
        (16, 4),
        (100, 8),
        (2000, 32),
        (4096, 64),
        (10000, 64),
        (16384, 128),
    ] {
        assert_eq!(compresspp_output_size(n), want, "{n}");
    }
}

#[test]
fn too_few_samples_are_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let s = PositionSamples::new(vec![Position2D::new(0.0, 0.0); 3]).unwrap();
    assert!(compresspp(&s, &CompressionConfig::default(), &KernelConfig::default(), &mut rng).is_err());
    assert!(kmeans_cluster(&s, 4, 5, &mut rng).is_err());
    assert!(iid_thin(&s, 4, &mut rng).is_err());
    assert!(PositionSamples::new(vec![]).is_err());
}
