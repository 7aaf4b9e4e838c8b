use proptest::prelude::*;
use vistac_core::fuse::*;
use vistac_core::geometry::{Rect, Vec2};
use vistac_core::grasp::GripperSpec;
use vistac_core::raster::Mask;
use vistac_core::tactile::calib::region_from_mask;
use vistac_core::tactile::{contact_region, sense, SensorNoise};
use vistac_core::worldsim::*;
use vistac_core::CoreError;
use vistac_nnet::loss::softmax;
use vistac_nnet::Tensor;

fn small(condition: BackgroundCondition) -> FusionDataConfig {
    FusionDataConfig { train_per_class: 12, test_per_class: 6, backgrounds: 8, condition, ..Default::default() }
}

fn quick_train() -> FusionTrainConfig {
    FusionTrainConfig { epochs: 200, ..Default::default() }
}

#[test]
fn dataset_is_deterministic_with_disjoint_backgrounds() {
    let g = GripperSpec::default();
    let cfg = small(BackgroundCondition::Heavy);
    let (a_train, a_test) = make_dataset(&cfg, &g, 3).unwrap();
    let (b_train, b_test) = make_dataset(&cfg, &g, 3).unwrap();
    assert_eq!(a_train, b_train);
    assert_eq!(a_test, b_test);
    assert_eq!(a_train.len(), 12 * NUM_CLASSES);
    assert_eq!(a_test.len(), 6 * NUM_CLASSES);
    for t in &a_test {
        assert!(a_train.iter().all(|s| s.background_id != t.background_id));
    }
    for s in a_train.iter().chain(&a_test) {
        assert_eq!(s.visual.len(), VISUAL_DIM);
        assert_eq!(s.tactile.len(), TACTILE_DIM);
    }
}

fn clean_descriptor(class_id: usize, r: f64) -> Vec<f32> {
    let g = GripperSpec::default();
    let scene = Scene {
        support: SupportField::flat(0.0),
        objects: vec![ObjectInstance {
            id: 0,
            class_id,
            footprint: class_shape(class_id, r),
            top_height: 40.0,
            base_on_support: true,
            graspable_diameter: 2.0 * r,
        }],
        background: Background::Solid { color: [0.3; 3] },
        lighting_gain: 1.0,
        workspace: Rect::centered(Vec2::ZERO, 400.0, 400.0),
        allow_overlap: false,
        ripple_seed: 0,
    };
    let f = sense(&scene, &g, Vec2::ZERO, 30.0, SensorNoise::NONE).unwrap();
    tactile_descriptor(&contact_region(&f, &g).unwrap(), &g)
}

#[test]
fn class_descriptors_are_pairwise_distinct() {
    let d: Vec<Vec<f32>> = (0..NUM_CLASSES).map(|c| clean_descriptor(c, 20.0)).collect();
    for i in 0..NUM_CLASSES {
        let max = d[i][..RADIAL_BINS].iter().copied().fold(0.0f32, f32::max);
        assert_eq!(max, 1.0);
        for j in i + 1..NUM_CLASSES {
            let l2: f32 = d[i].iter().zip(&d[j]).map(|(a, b)| (a - b).powi(2)).sum::<f32>().sqrt();
            assert!(l2 > 0.05, "classes {i} and {j}: {l2}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn descriptor_is_translation_invariant(
        cells in prop::collection::vec((0usize..12, 0usize..12), 5..60),
        dr in 0usize..40,
        dc in 0usize..40,
    ) {
        let g = GripperSpec::default();
        let mut a = Mask::new(g.resolution, g.resolution);
        let mut b = Mask::new(g.resolution, g.resolution);
        for &(r, c) in &cells {
            a.set(r + 50, c + 50, true);
            b.set(r + 50 + dr, c + 50 + dc, true);
        }
        let da = tactile_descriptor(&region_from_mask(a, &g).unwrap(), &g);
        let db = tactile_descriptor(&region_from_mask(b, &g).unwrap(), &g);
        let bits = |d: &[f32]| d.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&da), bits(&db));
    }

    #[test]
    fn softmax_rows_sum_to_one(logits in prop::collection::vec(-30.0f32..30.0, 6), s in 0.01f32..50.0) {
        let t = Tensor::from_vec(&[1, 6], logits.clone()).unwrap();
        let p = softmax(&t).unwrap();
        prop_assert!((p.data.iter().map(|&v| v as f64).sum::<f64>() - 1.0).abs() < 1e-6);
        // positive scaling keeps the predicted class
        let scaled = Tensor::from_vec(&[1, 6], logits.iter().map(|v| v * s).collect()).unwrap();
        let q = softmax(&scaled).unwrap();
        let arg = |d: &[f32]| d.iter().enumerate().fold(0, |bi, (i, &v)| if v > d[bi] { i } else { bi });
        prop_assert_eq!(arg(&p.data), arg(&q.data));
    }
}

#[test]
fn classifier_properties_after_training() {
    let g = GripperSpec::default();
    let (train, test) = make_dataset(&small(BackgroundCondition::Standard), &g, 1).unwrap();
    let (clf, acc) = train_classifier(&train, &test, &g, &quick_train(), Ablation::Fusion).unwrap();
    assert!(acc > 0.5, "fusion accuracy {acc}");
    // the training set is fitted
    let fitted = train.iter().filter(|s| clf.classify(s).unwrap().0 == s.label).count();
    assert!(fitted as f64 >= 0.95 * train.len() as f64);
    // probabilities are normalized
    let p = clf.probabilities(&test[0].input(Ablation::Fusion)).unwrap();
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    // with both modalities zeroed the bias-free network is uniform
    let z = clf.probabilities(&vec![0.0; INPUT_DIM]).unwrap();
    assert!(z.iter().all(|&v| (v - 1.0 / 6.0).abs() < 1e-6));
    // deterministic evaluation and checkpoint round trip
    assert_eq!(clf.accuracy(&test).unwrap(), acc);
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("fusion");
    clf.save(&stem).unwrap();
    let back = FusionClassifier::load(&stem).unwrap();
    assert_eq!(back.ablation, Ablation::Fusion);
    for s in &test {
        assert_eq!(back.classify(s).unwrap(), clf.classify(s).unwrap());
    }
}

#[test]
fn fusion_is_no_worse_than_touch_on_clean_tactile_data() {
    let g = GripperSpec::default();
    let cfg = FusionDataConfig { noise_rate: 0.0, ..FusionDataConfig::default() };
    let (train, test) = make_dataset(&cfg, &g, 2).unwrap();
    let tc = FusionTrainConfig::default();
    let (_, tactile) = train_classifier(&train, &test, &g, &tc, Ablation::TactileOnly).unwrap();
    let (_, fusion) = train_classifier(&train, &test, &g, &tc, Ablation::Fusion).unwrap();
    assert!(fusion >= tactile, "fusion {fusion} tactile {tactile}");
}

#[test]
fn single_class_and_absent_class() {
    let g = GripperSpec::default();
    let cfg = FusionDataConfig { classes: vec![3], ..small(BackgroundCondition::Standard) };
    let (train, test) = make_dataset(&cfg, &g, 4).unwrap();
    let (_, acc) = train_classifier(&train, &test, &g, &quick_train(), Ablation::VisualOnly).unwrap();
    assert_eq!(acc, 1.0);

    let two = FusionDataConfig { classes: vec![0, 1], ..small(BackgroundCondition::Standard) };
    let (_, test2) = make_dataset(&two, &g, 4).unwrap();
    let err = train_classifier(&train, &test2, &g, &quick_train(), Ablation::Fusion).unwrap_err();
    assert!(matches!(err, CoreError::ClassAbsent(0)));
}
