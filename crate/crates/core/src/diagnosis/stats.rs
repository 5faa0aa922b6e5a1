use rayon::prelude::*;
use serde::Serialize;

use super::pairing::pair_by_box2d;
use super::DiagnosisError;
use crate::evaluation::Frame;
use crate::geometry::{project, ReferencePoint};
use crate::kitti_io::{Calibration, ObjectLabel};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DepthBucketStats {
    pub bucket_center: f64,
    pub count: usize,
    /// `None` for an empty bucket.
    pub mean_abs_error: Option<f64>,
    /// Population standard deviation; `None` for an empty bucket.
    pub std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MisalignmentReport {
    pub buckets: Vec<DepthBucketStats>,
    /// Objects with `z ≤ 0` or whose reference point does not project.
    pub skipped: usize,
}

fn bucket_index(z: f64, interval: f64) -> usize {
    (z / interval + 0.5).floor().max(0.0) as usize
}

/// Groups `(depth, error)` samples into buckets centered on multiples of
/// `interval`, each covering `[c − interval/2, c + interval/2)`.
///
/// Buckets run from `interval` to the farthest populated one; the bucket at
/// 0 is listed only when something falls into it.
pub fn bucket_stats(samples: &[(f64, f64)], interval: f64) -> Vec<DepthBucketStats> {
    let Some(last) = samples.iter().map(|(z, _)| bucket_index(*z, interval)).max() else {
        return Vec::new();
    };
    let mut groups: Vec<Vec<f64>> = vec![Vec::new(); last.max(1) + 1];
    for &(z, e) in samples {
        groups[bucket_index(z, interval)].push(e.abs());
    }
    let first = if groups[0].is_empty() { 1 } else { 0 };
    groups
        .iter()
        .enumerate()
        .skip(first)
        .map(|(k, g)| {
            let count = g.len();
            let (mean, std) = if count == 0 {
                (None, None)
            } else {
                let n = count as f64;
                let mean = g.iter().sum::<f64>() / n;
                let var = g.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
                (Some(mean), Some(var.sqrt()))
            };
            DepthBucketStats {
                bucket_center: k as f64 * interval,
                count,
                mean_abs_error: mean,
                std,
            }
        })
        .collect()
}

fn check_interval(interval: f64) -> Result<(), DiagnosisError> {
    if interval > 0.0 && interval.is_finite() {
        Ok(())
    } else {
        Err(DiagnosisError::InvalidInterval(interval))
    }
}

/// Distance in pixels between each object's 2D box center and the
/// projection of its 3D reference point, bucketed by depth. DontCare rows
/// are ignored.
pub fn misalignment_stats(
    images: &[(&[ObjectLabel], &Calibration)],
    interval: f64,
    reference: ReferencePoint,
) -> Result<MisalignmentReport, DiagnosisError> {
    check_interval(interval)?;
    let per_image: Vec<(Vec<(f64, f64)>, usize)> = images
        .par_iter()
        .map(|(labels, calib)| {
            let mut samples = Vec::new();
            let mut skipped = 0;
            for label in labels.iter().filter(|l| !l.is_dont_care()) {
                let z = label.depth();
                let projected = (z > 0.0)
                    .then(|| project(&label.box3d().reference_point(reference), calib).ok())
                    .flatten();
                match projected {
                    Some(cw) => samples.push((z, (label.box2d.center() - cw).norm())),
                    None => skipped += 1,
                }
            }
            (samples, skipped)
        })
        .collect();
    let skipped = per_image.iter().map(|(_, s)| s).sum();
    let samples: Vec<(f64, f64)> = per_image.into_iter().flat_map(|(s, _)| s).collect();
    Ok(MisalignmentReport {
        buckets: bucket_stats(&samples, interval),
        skipped,
    })
}

/// `|z_pred − z_gt|` over prediction/ground-truth pairs (2D IoU ≥ 0.5,
/// greedy by score), bucketed by ground-truth depth.
pub fn depth_error_stats(frames: &[Frame], interval: f64) -> Result<Vec<DepthBucketStats>, DiagnosisError> {
    check_interval(interval)?;
    let samples: Vec<(f64, f64)> = frames
        .par_iter()
        .flat_map_iter(|f| {
            pair_by_box2d(&f.gts, &f.preds, super::PAIRING_IOU)
                .into_iter()
                .map(|p| {
                    let z_gt = f.gts[p.gt].depth();
                    (z_gt, f.preds[p.pred].depth() - z_gt)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(bucket_stats(&samples, interval))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_bucket_has_no_stats() {
        let s = bucket_stats(&[(10.0, 1.0), (30.0, 3.0)], 10.0);
        assert_eq!(s.len(), 3);
        assert_eq!(s[1].count, 0);
        assert_eq!(s[1].mean_abs_error, None);
        assert_eq!(s[2].mean_abs_error, Some(3.0));
    }

    #[test]
    fn population_std() {
        let s = bucket_stats(&[(10.0, 1.0), (11.0, 3.0)], 10.0);
        assert_eq!(s[0].mean_abs_error, Some(2.0));
        assert_eq!(s[0].std, Some(1.0));
    }

    #[test]
    fn near_zero_bucket_listed_when_used() {
        let s = bucket_stats(&[(2.0, 1.0)], 10.0);
        assert_eq!(s[0].bucket_center, 0.0);
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn nothing_in_nothing_out() {
        assert!(bucket_stats(&[], 10.0).is_empty());
    }
}
