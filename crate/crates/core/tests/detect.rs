use proptest::prelude::*;
use vistac_core::annotate::gaussian_mask_label;
use vistac_core::detect::*;
use vistac_core::geometry::{Rect, Vec2};
use vistac_core::grasp::{GraspCandidate, GripperSpec};
use vistac_core::raster::Raster;
use vistac_core::worldsim::*;

fn spikes(rows: usize, cols: usize, at: &[(usize, usize, f32)]) -> Raster {
    let mut q = Raster::zeros(rows, cols);
    for &(r, c, v) in at {
        q.set(r, c, v);
    }
    q
}

#[test]
fn single_spike_gives_one_candidate() {
    let q = spikes(20, 30, &[(7, 11, 0.9)]);
    let g = extract_grasps(&q, &Raster::zeros(20, 30), 5, 24.0);
    assert_eq!(g, vec![GraspCandidate { u: 11.0, v: 7.0, r_px: 0.0, q: 0.9f32 as f64 }]);
}

#[test]
fn equal_spikes_break_ties_by_row_major_index() {
    let q = spikes(20, 30, &[(12, 3, 0.7), (4, 25, 0.7)]);
    let g = extract_grasps(&q, &Raster::zeros(20, 30), 1, 24.0);
    assert_eq!((g[0].u, g[0].v), (25.0, 4.0));
    // adjacent equal pixels form one plateau, reported once at its first pixel
    let plateau = spikes(10, 10, &[(5, 5, 0.5), (5, 6, 0.5)]);
    let g = extract_grasps(&plateau, &Raster::zeros(10, 10), 5, 24.0);
    assert_eq!(g.len(), 1);
    assert_eq!((g[0].u, g[0].v), (5.0, 5.0));
}

#[test]
fn suppression_uses_the_predicted_radius() {
    let q = spikes(40, 40, &[(10, 10, 0.9), (10, 16, 0.8), (10, 30, 0.7)]);
    let mut r = Raster::zeros(40, 40);
    r.set(10, 10, 0.25); // 6 px at r_max 24
    let g = extract_grasps(&q, &r, 5, 24.0);
    let centres: Vec<(f64, f64)> = g.iter().map(|c| (c.u, c.v)).collect();
    assert_eq!(centres, vec![(10.0, 10.0), (30.0, 10.0)]);
    assert!(g.windows(2).all(|w| w[0].q >= w[1].q));
}

fn scene_of(objects: Vec<ObjectInstance>) -> Scene {
    Scene {
        support: SupportField::flat(0.0),
        objects,
        background: Background::Solid { color: [0.3; 3] },
        lighting_gain: 1.0,
        workspace: Rect::centered(Vec2::ZERO, 400.0, 400.0),
        allow_overlap: false,
        ripple_seed: 0,
    }
}

fn object(id: usize, class_id: usize, at: Vec2, r: f64) -> ObjectInstance {
    ObjectInstance {
        id,
        class_id,
        footprint: class_shape(class_id, r).translate(at),
        top_height: 40.0,
        base_on_support: true,
        graspable_diameter: 2.0 * r,
    }
}

#[test]
fn label_input_recovers_annotated_centres() {
    let cam = CameraModel::nadir_covering(Vec2::ZERO, 40.0, 200.0, 96, 96).unwrap();
    for class_id in 0..NUM_CLASSES {
        let scene = scene_of(vec![object(0, class_id, Vec2::new(13.0, -21.0), 24.0)]);
        let (g, meta) = gaussian_mask_label(&scene, &cam, 24.0).unwrap();
        let c = extract_grasps(&g.q, &g.r, 1, 24.0)[0];
        let ann = meta.objects[0].center;
        assert!((c.u - ann.0).hypot(c.v - ann.1) <= 1.0, "class {class_id}");
        let w = to_world(&c, &cam, 40.0, 0.0, &GripperSpec::default()).unwrap();
        assert!(w.r <= 35.0);
    }
}

#[test]
fn oracle_without_noise_equals_labels_and_jitter_moves_peaks() {
    let cam = CameraModel::nadir_covering(Vec2::ZERO, 40.0, 200.0, 96, 96).unwrap();
    let scene = scene_of(vec![object(0, 0, Vec2::ZERO, 20.0)]);
    let clean = OracleDetector::new(24.0);
    assert_eq!(clean.detect(&scene, &cam).unwrap(), gaussian_mask_label(&scene, &cam, 24.0).unwrap().0);
    let shifted = OracleDetector::new(24.0).with_offset(Vec2::new(20.0, 0.0));
    let g = shifted.detect(&scene, &cam).unwrap();
    let c = extract_grasps(&g.q, &g.r, 1, 24.0)[0];
    let w = to_world(&c, &cam, 40.0, 0.0, &GripperSpec::default()).unwrap();
    assert!((w.p.x - 20.0).abs() < 2.1 && w.p.y.abs() < 2.1);
    let noisy = OracleDetector::new(24.0).with_jitter(10.0, 3);
    assert_eq!(noisy.jitter_of(0), noisy.jitter_of(0));
    assert_ne!(noisy.jitter_of(0), noisy.jitter_of(1));
}

proptest! {
    #[test]
    fn positive_scaling_keeps_candidates(
        vals in prop::collection::vec(0.0f32..1.0, 24 * 24),
        scale in 0.01f32..100.0,
    ) {
        let q = Raster::from_vec(24, 24, vals);
        let r = Raster::from_vec(24, 24, q.data.iter().map(|v| v * 0.1).collect());
        let a = extract_grasps(&q, &r, 6, 24.0);
        let b = extract_grasps(&q.scale(scale), &r, 6, 24.0);
        let pa: Vec<(f64, f64)> = a.iter().map(|c| (c.u, c.v)).collect();
        let pb: Vec<(f64, f64)> = b.iter().map(|c| (c.u, c.v)).collect();
        prop_assert_eq!(pa, pb);
    }
}
