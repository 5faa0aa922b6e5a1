//! Seeded synthetic KITTI-like scenes with controllable, per-field
//! prediction noise. Used by tests, benchmarks and the CLI's fixture
//! generator.

use std::f64::consts::PI;

use nalgebra::{Matrix3x4, Point2, Point3, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnosis::{DiagnosisFrame, MEAN_CAR_SHAPE};
use crate::geometry::{back_project, iou_2d, project, Box2D, Box3D, Dimensions, ReferencePoint};
use crate::kitti_io::{Calibration, Category, ObjectLabel, RawHeadOutputs, HEADING_BINS};
use crate::losses::{heading_encode, rotation_y_to_alpha};

pub const IMAGE_WIDTH: f64 = 1242.0;
pub const IMAGE_HEIGHT: f64 = 375.0;
/// Output stride of the simulated heatmap; coarse centers sit on this grid.
pub const HEATMAP_STRIDE: f64 = 4.0;

/// The P2 matrix of a typical KITTI training image.
pub fn kitti_calibration() -> Calibration {
    Calibration::from_projection(Matrix3x4::new(
        7.215377e2, 0.0, 6.095593e2, 4.485728e1,
        0.0, 7.215377e2, 1.728540e2, 2.163791e-1,
        0.0, 0.0, 1.0, 2.745884e-3,
    ))
    .expect("constant calibration is valid")
}

/// Tight 2D box around the projected corners, or `None` when a corner is
/// behind the camera.
pub fn projected_box2d(b: &Box3D, calib: &Calibration) -> Option<Box2D> {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in b.corners() {
        let p = project(&c, calib).ok()?;
        lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    Some(Box2D::new(lo.x, lo.y, hi.x, hi.y))
}

/// Half-widths of the uniform perturbations applied to predictions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Projected-center shift per axis, pixels.
    pub center_px: f64,
    /// Relative depth error.
    pub depth_rel: f64,
    /// Relative error per size component.
    pub size_rel: f64,
    /// Yaw error, radians.
    pub yaw: f64,
    /// 2D box corner jitter, pixels.
    pub box2d_px: f64,
    pub false_positives_per_image: usize,
}

impl NoiseConfig {
    pub const NONE: NoiseConfig = NoiseConfig {
        center_px: 0.0,
        depth_rel: 0.0,
        size_rel: 0.0,
        yaw: 0.0,
        box2d_px: 0.0,
        false_positives_per_image: 0,
    };
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            center_px: 4.0,
            depth_rel: 0.08,
            size_rel: 0.05,
            yaw: 0.15,
            box2d_px: 2.0,
            false_positives_per_image: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub seed: u64,
    pub images: usize,
    pub objects_per_image: usize,
    pub min_depth: f64,
    pub max_depth: f64,
    pub noise: NoiseConfig,
    pub with_raw: bool,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            images: 50,
            objects_per_image: 4,
            min_depth: 6.0,
            max_depth: 40.0,
            noise: NoiseConfig::default(),
            with_raw: true,
        }
    }
}

fn jitter(rng: &mut ChaCha8Rng, half_width: f64) -> f64 {
    if half_width > 0.0 {
        rng.random_range(-half_width..=half_width)
    } else {
        0.0
    }
}

fn sample_car(rng: &mut ChaCha8Rng, cfg: &SceneConfig, calib: &Calibration) -> Option<ObjectLabel> {
    let z = rng.random_range(cfg.min_depth..=cfg.max_depth);
    let x = rng.random_range(-0.35 * z..=0.35 * z);
    let y = 1.65 + jitter(rng, 0.1);
    let scale = |rng: &mut ChaCha8Rng, v: f64| v * (1.0 + jitter(rng, 0.1));
    let dims = Dimensions::new(
        scale(rng, MEAN_CAR_SHAPE.h),
        scale(rng, MEAN_CAR_SHAPE.w),
        scale(rng, MEAN_CAR_SHAPE.l),
    );
    let rotation_y = rng.random_range(-PI..PI);
    let location = Point3::new(x, y, z);
    let box2d = projected_box2d(&Box3D::new(location, dims, rotation_y), calib)?;
    let inside = box2d.left >= 0.0
        && box2d.top >= 0.0
        && box2d.right <= IMAGE_WIDTH
        && box2d.bottom <= IMAGE_HEIGHT
        && box2d.height() >= 26.0;
    inside.then(|| ObjectLabel {
        category: Category::Car,
        truncation: 0.0,
        occlusion: 0,
        alpha: rotation_y_to_alpha(rotation_y, x, z),
        box2d,
        dims,
        location,
        rotation_y,
        score: None,
    })
}

fn raw_for(pred: &ObjectLabel, center: Point2<f64>) -> RawHeadOutputs {
    let coarse = Point2::new(
        (center.x / HEATMAP_STRIDE).floor() * HEATMAP_STRIDE,
        (center.y / HEATMAP_STRIDE).floor() * HEATMAP_STRIDE,
    );
    let heading = heading_encode(pred.alpha);
    let mut heading_bin_logits = [0.0; HEADING_BINS];
    heading_bin_logits[heading.bin] = 4.0;
    RawHeadOutputs {
        coarse_center: coarse,
        offset2d: pred.box2d.center() - coarse,
        offset3d: Vector2::new(center.x - coarse.x, center.y - coarse.y),
        depth: pred.depth(),
        depth_sigma: Some(0.05 * pred.depth()),
        size3d: pred.dims,
        heading_bin_logits,
        heading_residual: heading.residual,
        score: pred.score.unwrap_or(1.0),
    }
}

/// A prediction derived from `gt` by perturbing each field independently.
/// Returns the prediction and its projected (volumetric) center.
fn perturb(
    rng: &mut ChaCha8Rng,
    gt: &ObjectLabel,
    noise: &NoiseConfig,
    calib: &Calibration,
) -> Option<(ObjectLabel, Point2<f64>)> {
    let reference = ReferencePoint::VolumetricCenter;
    let gt_center = project(&gt.box3d().reference_point(reference), calib).ok()?;
    let center = Point2::new(
        gt_center.x + jitter(rng, noise.center_px),
        gt_center.y + jitter(rng, noise.center_px),
    );
    let depth = gt.depth() * (1.0 + jitter(rng, noise.depth_rel));
    let dims = Dimensions::from_array(gt.dims.as_array().map(|v| v * (1.0 + jitter(rng, noise.size_rel))));
    let rotation_y = gt.rotation_y + jitter(rng, noise.yaw);
    let point = back_project(&center, depth, calib).ok()?;
    let location = Box3D::location_from_reference(point, dims.h, reference);
    let b = noise.box2d_px;
    let box2d = Box2D::new(
        gt.box2d.left + jitter(rng, b),
        gt.box2d.top + jitter(rng, b),
        gt.box2d.right + jitter(rng, b),
        gt.box2d.bottom + jitter(rng, b),
    );
    let pred = ObjectLabel {
        category: gt.category,
        truncation: gt.truncation,
        occlusion: gt.occlusion,
        alpha: rotation_y_to_alpha(rotation_y, location.x, location.z),
        box2d,
        dims,
        location,
        rotation_y,
        score: Some(rng.random_range(0.3..1.0)),
    };
    Some((pred, center))
}

/// Generates `cfg.images` scenes of non-overlapping, fully visible cars with
/// matching noisy predictions. Deterministic for a given seed; image `i`
/// uses stream `i` of the seed so images are independent of each other.
pub fn synthetic_scene(cfg: &SceneConfig) -> Vec<DiagnosisFrame> {
    let calib = kitti_calibration();
    (0..cfg.images)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let mut gts: Vec<ObjectLabel> = Vec::new();
            let mut attempts = 0;
            while gts.len() < cfg.objects_per_image && attempts < 200 * cfg.objects_per_image.max(1) {
                attempts += 1;
                if let Some(car) = sample_car(&mut rng, cfg, &calib) {
                    if gts.iter().all(|g| iou_2d(&g.box2d, &car.box2d) < 0.05) {
                        gts.push(car);
                    }
                }
            }
            let mut preds = Vec::new();
            let mut raw = Vec::new();
            for gt in &gts {
                if let Some((pred, center)) = perturb(&mut rng, gt, &cfg.noise, &calib) {
                    raw.push(raw_for(&pred, center));
                    preds.push(pred);
                }
            }
            for _ in 0..cfg.noise.false_positives_per_image {
                if let Some(mut fp) = sample_car(&mut rng, cfg, &calib) {
                    if gts.iter().all(|g| iou_2d(&g.box2d, &fp.box2d) < 0.05) {
                        fp.score = Some(rng.random_range(0.3..1.0));
                        let center = project(&fp.box3d().reference_point(ReferencePoint::VolumetricCenter), &calib)
                            .expect("sampled cars are in front of the camera");
                        raw.push(raw_for(&fp, center));
                        preds.push(fp);
                    }
                }
            }
            DiagnosisFrame {
                gts,
                preds,
                calib: calib.clone(),
                raw: cfg.with_raw.then_some(raw),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let cfg = SceneConfig {
            images: 3,
            ..SceneConfig::default()
        };
        assert_eq!(synthetic_scene(&cfg), synthetic_scene(&cfg));
    }

    #[test]
    fn noiseless_predictions_reproduce_gt_center() {
        let cfg = SceneConfig {
            images: 2,
            noise: NoiseConfig::NONE,
            ..SceneConfig::default()
        };
        for f in synthetic_scene(&cfg) {
            assert_eq!(f.gts.len(), f.preds.len());
            for (g, p) in f.gts.iter().zip(&f.preds) {
                assert!((g.location - p.location).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn raw_center_matches_projection() {
        let f = &synthetic_scene(&SceneConfig {
            images: 1,
            ..SceneConfig::default()
        })[0];
        let raw = f.raw.as_ref().unwrap();
        for (p, r) in f.preds.iter().zip(raw) {
            let cw = project(&p.box3d().reference_point(ReferencePoint::VolumetricCenter), &f.calib).unwrap();
            assert!((cw - r.projected_center()).norm() < 1e-6);
            assert_eq!(r.depth, p.depth());
        }
    }
}
