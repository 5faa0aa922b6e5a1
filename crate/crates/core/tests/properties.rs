use std::f64::consts::PI;

use mono3d::evaluation::{ap40, aos, Difficulty, EvalConfig, Frame, Task};
use mono3d::geometry::{
    back_project, iou_2d, iou_3d, iou_bev, project, Box2D, Box3D, Dimensions, ReferencePoint,
};
use mono3d::kitti_io::{parse_label_file, write_label_file, Category, ObjectLabel};
use mono3d::losses::{heading_decode, heading_encode, normalize_angle, sample_weight, SampleWeightParams};
use mono3d::synthetic::{kitti_calibration, synthetic_scene, SceneConfig};
use nalgebra::{Point2, Point3};
use proptest::prelude::*;

fn arb_box() -> impl Strategy<Value = Box3D> {
    (
        -5.0..5.0f64,
        0.0..3.0f64,
        5.0..40.0f64,
        0.3..3.0f64,
        0.3..3.0f64,
        0.5..6.0f64,
        -PI..PI,
    )
        .prop_map(|(x, y, z, h, w, l, yaw)| Box3D::new(Point3::new(x, y, z), Dimensions::new(h, w, l), yaw))
}

fn arb_box2d() -> impl Strategy<Value = Box2D> {
    (0.0..1000.0f64, 0.0..300.0f64, 0.0..200.0f64, 0.0..100.0f64)
        .prop_map(|(l, t, w, h)| Box2D::new(l, t, l + w, t + h))
}

fn arb_label() -> impl Strategy<Value = ObjectLabel> {
    (
        0usize..8,
        0.0..1.0f64,
        0i8..=3,
        -PI..PI,
        arb_box2d(),
        arb_box(),
        proptest::option::of(0.0..1.0f64),
    )
        .prop_map(|(c, truncation, occlusion, alpha, box2d, b, score)| ObjectLabel {
            category: Category::ALL[c],
            truncation,
            occlusion,
            alpha,
            box2d,
            dims: b.dims,
            location: b.location,
            rotation_y: b.yaw,
            score,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn iou_is_symmetric_and_bounded(a in arb_box(), b in arb_box()) {
        for f in [iou_bev, iou_3d] {
            let ab = f(&a, &b);
            let ba = f(&b, &a);
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert!((ab - ba).abs() < 1e-9);
        }
    }

    #[test]
    fn self_iou_is_one(a in arb_box()) {
        prop_assert!((iou_3d(&a, &a) - 1.0).abs() < 1e-9);
        prop_assert!((iou_bev(&a, &a) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn three_d_never_exceeds_bev(a in arb_box(), b in arb_box()) {
        prop_assert!(iou_3d(&a, &b) <= iou_bev(&a, &b) + 1e-12);
    }

    #[test]
    fn iou_translation_invariant(a in arb_box(), b in arb_box(), dx in -10.0..10.0f64, dz in -10.0..10.0f64) {
        let shift = |mut x: Box3D| { x.location.x += dx; x.location.z += dz; x };
        prop_assert!((iou_3d(&a, &b) - iou_3d(&shift(a), &shift(b))).abs() < 1e-9);
    }

    #[test]
    fn iou_2d_bounded(a in arb_box2d(), b in arb_box2d()) {
        let v = iou_2d(&a, &b);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, iou_2d(&b, &a));
    }

    #[test]
    fn projection_round_trip(x in -20.0..20.0f64, y in -3.0..3.0f64, z in 1.0..80.0f64) {
        let calib = kitti_calibration();
        let p = Point3::new(x, y, z);
        let uv = project(&p, &calib).unwrap();
        let back = back_project(&uv, z, &calib).unwrap();
        prop_assert!((back - p).norm() < 1e-9);
    }

    #[test]
    fn heading_round_trip(theta in -10.0..10.0f64) {
        let decoded = heading_decode(&heading_encode(theta));
        prop_assert!(normalize_angle(decoded - theta).abs() < 1e-9);
    }

    #[test]
    fn label_round_trip_is_stable(labels in proptest::collection::vec(arb_label(), 0..20)) {
        let text = write_label_file(&labels);
        let parsed = parse_label_file(text.as_bytes()).unwrap();
        prop_assert_eq!(parsed.len(), labels.len());
        prop_assert_eq!(write_label_file(&parsed), text);
    }

    #[test]
    fn parser_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..400)) {
        let _ = parse_label_file(&bytes);
    }

    #[test]
    fn soft_weight_in_unit_interval(d in 0.0..200.0f64, c in 10.0..100.0f64, t in 1e-4..20.0f64) {
        let w = sample_weight(d, &SampleWeightParams::Soft { center: c, temperature: t });
        prop_assert!((0.0..=1.0).contains(&w));
    }
}

fn frames(seed: u64) -> Vec<Frame> {
    synthetic_scene(&SceneConfig { seed, images: 12, ..SceneConfig::default() })
        .into_iter()
        .map(|f| Frame::new(f.gts, f.preds))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn adding_top_scored_true_positive_never_lowers_ap(seed in 0u64..1000) {
        let cfg = EvalConfig::new(Task::Bev, Category::Car, Difficulty::Moderate).with_threshold(0.5);
        let mut fs = frames(seed);
        let before = ap40(&fs, &cfg).unwrap().ap40;
        let gt = ObjectLabel {
            box2d: Box2D::new(10.0, 10.0, 60.0, 60.0),
            location: Point3::new(-30.0, 1.6, 70.0),
            ..fs[0].gts[0].clone()
        };
        fs[0].gts.push(gt.clone());
        let with_gt = ap40(&fs, &cfg).unwrap().ap40;
        fs[0].preds.push(ObjectLabel { score: Some(2.0), ..gt });
        let after = ap40(&fs, &cfg).unwrap().ap40;
        prop_assert!(after >= with_gt - 1e-12);
        prop_assert!(after >= before - 100.0 / 40.0);
    }

    #[test]
    fn removing_false_positive_never_lowers_ap(seed in 0u64..1000) {
        let cfg = EvalConfig::new(Task::Detect3D, Category::Car, Difficulty::Moderate);
        let fs = frames(seed);
        let full = ap40(&fs, &cfg).unwrap();
        let Some(fp) = full.outcomes.iter().find(|o| matches!(o.outcome, mono3d::evaluation::DetectionOutcome::FalsePositive)) else {
            return Ok(());
        };
        let mut pruned = fs.clone();
        pruned[fp.frame].preds.remove(fp.index);
        prop_assert!(ap40(&pruned, &cfg).unwrap().ap40 >= full.ap40 - 1e-12);
    }

    #[test]
    fn aos_bounded_by_2d_ap(seed in 0u64..1000) {
        let cfg = EvalConfig::new(Task::Detect2D, Category::Car, Difficulty::Moderate);
        let fs = frames(seed);
        prop_assert!(aos(&fs, &cfg).unwrap().ap40 <= ap40(&fs, &cfg).unwrap().ap40 + 1e-9);
    }
}

#[test]
fn volumetric_center_projects_above_bottom_center() {
    let calib = kitti_calibration();
    let b = Box3D::new(Point3::new(0.0, 1.6, 20.0), Dimensions::new(1.5, 1.6, 3.9), 0.3);
    let bottom = project(&b.reference_point(ReferencePoint::BottomCenter), &calib).unwrap();
    let middle = project(&b.reference_point(ReferencePoint::VolumetricCenter), &calib).unwrap();
    assert!(middle.y < bottom.y);
    let _: Point2<f64> = middle;
}
