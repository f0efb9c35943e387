use cmcl_core::fusion::*;
use cmcl_core::geometry::{Detection, Pose};
use cmcl_core::mcl::{effective_sample_size, Belief};
use cmcl_core::wire::{decode, encode, Method};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cloud(n: usize, cx: f64, cy: f64, spread: f64, rng: &mut ChaCha8Rng) -> Belief {
    Belief::from_poses((0..n).map(|_| {
        Pose::new(
            cx + rng.random_range(-spread..spread),
            cy + rng.random_range(-spread..spread),
            rng.random_range(0.0..std::f64::consts::TAU),
        )
    }))
    .unwrap()
}

fn method() -> impl Strategy<Value = Method> {
    prop::sample::select(Method::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fused_weights_stay_normalized(m in method(), seed in any::<u64>(), range in 0.3f64..8.0, bearing in -0.9f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sender = cloud(300, 0.0, 0.0, 1.0, &mut rng);
        let mut receiver = cloud(300, range, 0.0, 2.0, &mut rng);
        let msg = summarize(&sender, &Detection::new(range, bearing), m, &SummaryConfig::default(), 0, 0, &mut rng).unwrap();
        fuse(&mut receiver, &decode(&encode(&msg).unwrap()).unwrap(), &DetectionModel::default()).unwrap();
        prop_assert!((receiver.weight_sum() - 1.0).abs() < 1e-9);
        prop_assert!(receiver.particles().iter().all(|p| p.weight.is_finite() && p.weight >= 0.0));
    }

    #[test]
    fn reciprocal_sampling_keeps_size_and_uniform_weights(m in method(), alpha in 0.0f64..=1.0, seed in any::<u64>()) {
        prop_assume!(m != Method::Det);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sender = cloud(200, 1.0, 1.0, 0.5, &mut rng);
        let receiver = cloud(150, 2.0, 1.0, 2.0, &mut rng);
        let msg = summarize(&sender, &Detection::new(1.0, 0.0), m, &SummaryConfig::default(), 0, 0, &mut rng).unwrap();
        let rb = ReceivedBelief::from_summary(&msg, &DetectionModel::default()).unwrap();
        let out = reciprocal_sample(&receiver, &rb, alpha, &mut rng).unwrap();
        prop_assert_eq!(out.len(), receiver.len());
        prop_assert!(out.particles().iter().all(|p| p.weight == 1.0 / 150.0));
    }
}

#[test]
fn fusion_moves_mass_toward_the_detected_position() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    // sender sure of its pose, heading along +x
    let sender = Belief::from_poses(
        cloud(500, 0.0, 0.0, 0.05, &mut rng)
            .particles()
            .iter()
            .map(|p| Pose::new(p.pose.x, p.pose.y, 0.0)),
    )
    .unwrap();
    for m in Method::ALL {
        // receiver split between the true spot (2, 0) and a mirror at (-2, 0)
        let mut receiver = Belief::from_poses(
            cloud(200, 2.0, 0.0, 0.05, &mut rng)
                .particles()
                .iter()
                .chain(cloud(200, -2.0, 0.0, 0.05, &mut rng).particles())
                .map(|p| p.pose),
        )
        .unwrap();
        let msg = summarize(
            &sender,
            &Detection::new(2.0, 0.0),
            m,
            &SummaryConfig::default(),
            0,
            0,
            &mut rng,
        )
        .unwrap();
        fuse(&mut receiver, &msg, &DetectionModel::default()).unwrap();
        let right: f64 = receiver
            .particles()
            .iter()
            .filter(|p| p.pose.x > 0.0)
            .map(|p| p.weight)
            .sum();
        assert!(right > 0.99, "{m}: {right}");
    }
}

#[test]
fn receive_resamples_only_when_effective_size_collapses() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let sender = cloud(300, 0.0, 0.0, 0.05, &mut rng);
    let msg = summarize(
        &sender,
        &Detection::new(2.0, 0.0),
        Method::Compresspp,
        &SummaryConfig::default(),
        0,
        0,
        &mut rng,
    )
    .unwrap();
    let strategy = FusionStrategy::new(Method::Compresspp, DEFAULT_ALPHA).unwrap();
    let model = DetectionModel::default();

    let mut spread = cloud(400, 2.0, 0.0, 3.0, &mut rng);
    assert!(receive(&mut spread, &msg, &model, &strategy, 0.5, &mut rng).unwrap());
    assert!(spread.has_uniform_weights());

    let mut agreeing = cloud(400, 2.0, 0.0, 0.01, &mut rng);
    assert!(!receive(&mut agreeing, &msg, &model, &strategy, 0.5, &mut rng).unwrap());
    assert!(effective_sample_size(&agreeing) >= 200.0);

    let wrong = FusionStrategy::new(Method::Naive, DEFAULT_ALPHA).unwrap();
    assert!(matches!(
        receive(&mut agreeing, &msg, &model, &wrong, 0.5, &mut rng),
        Err(FusionError::WrongMethod { .. })
    ));
}

#[test]
fn det_alpha_is_forced_to_zero() {
    assert!(FusionStrategy::new(Method::Det, 0.0).is_ok());
    assert_eq!(FusionStrategy::new(Method::Det, 0.06).unwrap().alpha, 0.0);
    assert!(FusionStrategy::new(Method::Naive, 1.5).is_err());
    assert!(FusionStrategy::new(Method::Naive, f64::NAN).is_err());
}
