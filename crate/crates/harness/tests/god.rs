use proptest::prelude::*;
use vistac_core::annotate::object_mask;
use vistac_core::geometry::Vec2;
use vistac_core::raster::Mask;
use vistac_core::worldsim::{class_shape, CameraModel, ObjectInstance};
use vistac_harness::god::*;

fn rect_mask(rows: usize, cols: usize, r0: usize, r1: usize, c0: usize, c1: usize) -> Mask {
    let mut m = Mask::new(rows, cols);
    for r in r0..r1 {
        for c in c0..c1 {
            m.set(r, c, true);
        }
    }
    m
}

#[test]
fn disc_object_and_its_circle_agree() {
    let cam = CameraModel::nadir_covering(Vec2::ZERO, 40.0, 200.0, 96, 96).unwrap();
    let disc = ObjectInstance {
        id: 0,
        class_id: 0,
        footprint: class_shape(0, 25.0),
        top_height: 40.0,
        base_on_support: true,
        graspable_diameter: 50.0,
    };
    let mask = object_mask(&disc, &cam);
    let (u, v) = cam.project_xy(Vec2::ZERO, 40.0).unwrap();
    let r = 25.0 / cam.mm_per_px(40.0);
    let g = god(&Circle { u, v, r }, &mask, GodDenominator::Iou).unwrap();
    assert!(g > 0.95, "{g}");
    let own = circle_mask(&Circle { u, v, r }, 96, 96);
    assert_eq!(god(&Circle { u, v, r }, &own, GodDenominator::Iou).unwrap(), 1.0);
}

#[test]
fn disjoint_regions_score_zero() {
    let mask = rect_mask(20, 20, 0, 5, 0, 5);
    let c = Circle { u: 15.0, v: 15.0, r: 3.0 };
    assert_eq!(god(&c, &mask, GodDenominator::Iou).unwrap(), 0.0);
    assert_eq!(god(&c, &mask, GodDenominator::Circle).unwrap(), 0.0);
}

#[test]
fn half_inside_circle_matches_hand_count() {
    // rows 5..15 of a 20x20 raster: 200 pixels
    let mask = rect_mask(20, 20, 5, 15, 0, 20);
    // radius 4 about (10, 5): per-row widths 1,5,7,7,9,7,7,5,1 = 49 pixels,
    // of which the rows at and below the centre hold 9+7+7+5+1 = 29
    let c = Circle { u: 10.0, v: 5.0, r: 4.0 };
    assert_eq!(circle_mask(&c, 20, 20).count(), 49);
    assert_eq!(god(&c, &mask, GodDenominator::Iou).unwrap(), 29.0 / 220.0);
    assert_eq!(god(&c, &mask, GodDenominator::Circle).unwrap(), 29.0 / 49.0);
}

#[test]
fn threshold_is_strict() {
    assert!(!is_correct(0.45));
    assert!(is_correct(0.4500001));
    assert!(!is_correct(0.0));
}

#[test]
fn non_positive_radius_is_rejected() {
    let mask = rect_mask(8, 8, 0, 4, 0, 4);
    assert!(god(&Circle { u: 2.0, v: 2.0, r: 0.0 }, &mask, GodDenominator::Iou).is_err());
    assert!(overlap(&mask, &Mask::new(4, 4), GodDenominator::Iou).is_err());
}

fn mask_strategy() -> impl Strategy<Value = Mask> {
    prop::collection::vec(any::<bool>(), 12 * 12).prop_map(|data| Mask { rows: 12, cols: 12, data })
}

proptest! {
    #[test]
    fn overlap_is_bounded_and_symmetric(a in mask_strategy(), b in mask_strategy()) {
        let ab = overlap(&a, &b, GodDenominator::Iou).unwrap();
        let ba = overlap(&b, &a, GodDenominator::Iou).unwrap();
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert_eq!(ab, ba);
        let frac = overlap(&a, &b, GodDenominator::Circle).unwrap();
        prop_assert!((0.0..=1.0).contains(&frac));
        prop_assert!(frac >= ab);
    }

    #[test]
    fn self_overlap_is_one(u in 2.0f64..20.0, v in 2.0f64..20.0, r in 0.5f64..8.0) {
        let c = Circle { u, v, r };
        let m = circle_mask(&c, 24, 24);
        prop_assume!(m.count() > 0);
        prop_assert_eq!(god(&c, &m, GodDenominator::Iou).unwrap(), 1.0);
    }
}
