use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vistac_core::geometry::{Rect, Vec2};
use vistac_core::grasp::GripperSpec;
use vistac_core::raster::Mask;
use vistac_core::tactile::calib::region_from_mask;
use vistac_core::tactile::*;
use vistac_core::worldsim::*;

fn scene_of(objects: Vec<(usize, Vec2, f64, f64)>) -> Scene {
    Scene {
        support: SupportField::flat(0.0),
        objects: objects
            .into_iter()
            .enumerate()
            .map(|(id, (class_id, at, r, top))| ObjectInstance {
                id,
                class_id,
                footprint: class_shape(class_id, r).translate(at),
                top_height: top,
                base_on_support: true,
                graspable_diameter: 2.0 * r,
            })
            .collect(),
        background: Background::Solid { color: [0.3; 3] },
        lighting_gain: 1.0,
        workspace: Rect::centered(Vec2::ZERO, 400.0, 400.0),
        allow_overlap: false,
        ripple_seed: 0,
    }
}

fn centroid_px(m: &Mask) -> (f64, f64) {
    let px = m.pixels();
    let n = px.len() as f64;
    let (sr, sc) = px.iter().fold((0.0, 0.0), |(a, b), &(r, c)| (a + r as f64, b + c as f64));
    (sr / n, sc / n)
}

#[test]
fn high_gripper_feels_nothing() {
    let g = GripperSpec::default();
    let scene = scene_of(vec![(0, Vec2::ZERO, 30.0, 40.0)]);
    let f = sense(&scene, &g, Vec2::ZERO, 41.0, SensorNoise::NONE).unwrap();
    assert_eq!(f.mask.count(), 0);
    assert!(contact_region(&f, &g).is_none());
}

#[test]
fn centred_press_gives_centred_disc() {
    let g = GripperSpec::default();
    let scene = scene_of(vec![(0, Vec2::ZERO, 60.0, 40.0)]);
    let f = sense(&scene, &g, Vec2::ZERO, 35.0, SensorNoise::NONE).unwrap();
    let (r, c) = centroid_px(&f.mask);
    let mid = (g.resolution as f64 - 1.0) / 2.0;
    assert!((r - mid).abs() < 1e-9 && (c - mid).abs() < 1e-9);
    // disc radius follows the hemisphere: sqrt(2 rho d - d^2) at depth d = 5
    let expect = (2.0 * 40.0 * 5.0 - 25.0f64).sqrt() * g.px_per_mm;
    let area = f.mask.count() as f64;
    assert!((area - std::f64::consts::PI * expect * expect).abs() / area < 0.03);
}

#[test]
fn offset_object_shifts_contact_centroid() {
    let g = GripperSpec::default();
    let scene = scene_of(vec![(0, Vec2::new(10.0, 0.0), 8.0, 40.0)]);
    let f = sense(&scene, &g, Vec2::ZERO, 30.0, SensorNoise::NONE).unwrap();
    let (r, c) = centroid_px(&f.mask);
    let mid = (g.resolution as f64 - 1.0) / 2.0;
    assert!((c - mid - 10.0 * g.px_per_mm).abs() < 0.5);
    assert!((r - mid).abs() < 0.5);
}

#[test]
fn noiseless_frames_follow_the_contact_rule_exactly() {
    let g = GripperSpec { resolution: 40, px_per_mm: 0.5, ..GripperSpec::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let scene = scene_of(vec![
            (rng.random_range(0..6), Vec2::new(rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0)), 20.0, 40.0),
            (rng.random_range(0..6), Vec2::new(rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0)), 15.0, 55.0),
        ]);
        let h = rng.random_range(20.0..56.0);
        let f = sense(&scene, &g, Vec2::ZERO, h, SensorNoise::NONE).unwrap();
        for i in 0..40 {
            for j in 0..40 {
                let d = Vec2::new((j as f64 + 0.5 - 20.0) / 0.5, (i as f64 + 0.5 - 20.0) / 0.5);
                let l = d.norm();
                let sag = 40.0 - (1600.0 - l * l).max(0.0).sqrt();
                let expect = l <= 40.0
                    && scene.objects.iter().any(|o| o.footprint.contains(d) && o.top_height >= h + sag);
                assert_eq!(f.mask.get(i, j), expect);
            }
        }
    }
}

#[test]
fn pose_outside_workspace_is_an_error() {
    let g = GripperSpec::default();
    let scene = scene_of(vec![]);
    assert!(sense(&scene, &g, Vec2::new(500.0, 0.0), 30.0, SensorNoise::NONE).is_err());
}

fn hausdorff(a: &Mask, b: &Mask) -> f64 {
    let pa = a.pixels();
    let pb = b.pixels();
    let directed = |x: &[(usize, usize)], y: &[(usize, usize)]| {
        x.iter()
            .map(|&(r, c)| {
                y.iter()
                    .map(|&(r2, c2)| (r as f64 - r2 as f64).hypot(c as f64 - c2 as f64))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    directed(&pa, &pb).max(directed(&pb, &pa))
}

#[test]
fn segmentation_examples() {
    let g = GripperSpec::default();
    let scene = scene_of(vec![(0, Vec2::new(3.0, -4.0), 15.0, 40.0)]);
    let clean = sense(&scene, &g, Vec2::ZERO, 30.0, SensorNoise::NONE).unwrap();
    assert_eq!(segment(&clean.mask), clean.mask);
    for seed in 0..5 {
        let noisy = sense(&scene, &g, Vec2::ZERO, 30.0, SensorNoise::new(0.01, seed)).unwrap();
        assert!(hausdorff(&segment(&noisy.mask), &clean.mask) <= 2.0);
    }
}

#[test]
fn noise_only_frames_stay_below_contact_threshold() {
    let g = GripperSpec::default();
    let scene = scene_of(vec![]);
    let mut largest = 0;
    for seed in 0..200 {
        let f = sense(&scene, &g, Vec2::ZERO, 30.0, SensorNoise::new(0.01, seed)).unwrap();
        largest = largest.max(segment(&f.mask).count());
        assert!(contact_region(&f, &g).is_none());
    }
    assert!(largest < g.min_contact_area);
}

/// Smallest circle over all pair-diameter and triple-circumcircle candidates.
fn brute_force_mec(p: &[Vec2]) -> Circle {
    let mut cands = vec![Circle { center: p[0], radius: 0.0 }];
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            cands.push(Circle { center: p[i].lerp(p[j], 0.5), radius: p[i].dist(p[j]) / 2.0 });
            for k in j + 1..p.len() {
                let (a, b, c) = (p[i], p[j], p[k]);
                let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
                if d.abs() < 1e-12 {
                    continue;
                }
                let (a2, b2, c2) = (a.norm_sq(), b.norm_sq(), c.norm_sq());
                let ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
                let uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
                let center = Vec2::new(ux, uy);
                cands.push(Circle { center, radius: center.dist(a) });
            }
        }
    }
    cands
        .into_iter()
        .filter(|c| p.iter().all(|&q| q.dist(c.center) <= c.radius * (1.0 + 1e-12) + 1e-12))
        .min_by(|a, b| a.radius.total_cmp(&b.radius))
        .unwrap()
}

#[test]
fn mec_matches_brute_force_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..300 {
        let n = rng.random_range(1..=30);
        let pts: Vec<Vec2> =
            (0..n).map(|_| Vec2::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0))).collect();
        let a = min_enclosing_circle(&pts).unwrap();
        let b = brute_force_mec(&pts);
        assert!((a.radius - b.radius).abs() <= 1e-9);
        assert!(a.center.dist(b.center) <= 1e-9);
    }
}

#[test]
fn calibration_examples() {
    let g = GripperSpec::default();
    let centred = scene_of(vec![(0, Vec2::ZERO, 15.0, 40.0)]);
    let f = sense(&centred, &g, Vec2::ZERO, 30.0, SensorNoise::NONE).unwrap();
    let d = calibration_offset(&contact_region(&f, &g).unwrap()).unwrap();
    assert!(d.norm() < 1e-9);

    // a disc 8 mm off the axis, sensed with 1% noise
    let offset = scene_of(vec![(0, Vec2::new(-8.0, 0.0), 15.0, 40.0)]);
    for seed in 0..10 {
        let f = sense(&offset, &g, Vec2::ZERO, 30.0, SensorNoise::new(0.01, seed)).unwrap();
        let d = calibration_offset(&contact_region(&f, &g).unwrap()).unwrap();
        assert!(d.dist(Vec2::new(-8.0, 0.0)) <= 1.5, "{d:?}");
    }

    let empty = region_from_mask(Mask::new(g.resolution, g.resolution), &g);
    assert!(empty.is_err());
}

#[test]
fn one_noise_free_cycle_recentres_within_a_pixel() {
    let g = GripperSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let class_id = [0, 1, 3][rng.random_range(0..3)];
        let at = Vec2::new(rng.random_range(-8.0..8.0), rng.random_range(-8.0..8.0));
        let scene = scene_of(vec![(class_id, at, 10.0, 40.0)]);
        // deep enough that the whole footprint is in contact
        let f = sense(&scene, &g, Vec2::ZERO, 28.0, SensorNoise::NONE).unwrap();
        let d = calibration_offset(&contact_region(&f, &g).unwrap()).unwrap();
        let centroid = scene.objects[0].centroid();
        assert!(d.dist(centroid) <= 1.0 / g.px_per_mm, "{d:?} vs {centroid:?}");
    }
}

fn calibration_loop(scene: &Scene, g: &GripperSpec, h: f64, start: Vec2, rate: f64, seed: u64) -> (Option<usize>, Vec<f64>) {
    let target = scene.objects[0].centroid();
    let mut p = start;
    let mut dists = vec![p.dist(target)];
    for it in 0..=5 {
        let f = sense(scene, g, p, h, SensorNoise::new(rate, seed * 31 + it as u64)).unwrap();
        let Some(region) = contact_region(&f, g) else { return (None, dists) };
        let d = calibration_offset(&region).unwrap();
        if d.norm() <= 2.0 {
            return (Some(it), dists);
        }
        p = p + d;
        dists.push(p.dist(target));
    }
    (None, dists)
}

#[test]
fn noisy_calibration_converges_within_five_iterations() {
    let g = GripperSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut converged = 0;
    for trial in 0..1000 {
        let r = rng.random_range(12.0..25.0);
        let class_id = rng.random_range(0..6);
        let scene = scene_of(vec![(class_id, Vec2::ZERO, r, 40.0)]);
        let start = Vec2::new(rng.random_range(-15.0..15.0), rng.random_range(-15.0..15.0));
        let h = adaptive_drop_height(r, 40.0, &AhdConfig::default());
        let rate = rng.random_range(0.0..=0.02);
        if let (Some(it), _) = calibration_loop(&scene, &g, h, start, rate, trial) {
            assert!(it <= 5);
            converged += 1;
        }
    }
    assert!(converged >= 990, "converged {converged}/1000");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn noise_free_calibration_never_moves_away(
        r in 10.0f64..25.0,
        class_id in 0usize..6,
        sx in -20.0f64..20.0,
        sy in -20.0f64..20.0,
    ) {
        let g = GripperSpec::default();
        let scene = scene_of(vec![(class_id, Vec2::ZERO, r, 40.0)]);
        let h = adaptive_drop_height(r, 40.0, &AhdConfig::default());
        let (_, dists) = calibration_loop(&scene, &g, h, Vec2::new(sx, sy), 0.0, 0);
        for w in dists.windows(2) {
            prop_assert!(w[1] <= w[0] + 1.0 / g.px_per_mm, "{:?}", dists);
        }
    }

    #[test]
    fn segmented_pixels_lie_in_their_circle(seed in 0u64..10_000, rate in 0.0f64..0.03) {
        let g = GripperSpec::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scene = scene_of(vec![(rng.random_range(0..6), Vec2::new(rng.random_range(-20.0..20.0), 0.0), 18.0, 40.0)]);
        let f = sense(&scene, &g, Vec2::ZERO, 31.0, SensorNoise::new(rate, seed)).unwrap();
        if let Some(region) = contact_region(&f, &g) {
            for &(i, j) in &region.pixels {
                let p = vistac_core::tactile::sensor::sensor_coords(&g, i, j);
                prop_assert!(p.dist(region.mec.center) <= region.mec.radius + 1e-6);
            }
        }
    }

    #[test]
    fn ahd_is_monotone(a in 0.0f64..60.0, b in 0.0f64..60.0, h in 0.0f64..100.0) {
        let c = AhdConfig::default();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(adaptive_drop_height(lo, h, &c) >= adaptive_drop_height(hi, h, &c));
    }
}
