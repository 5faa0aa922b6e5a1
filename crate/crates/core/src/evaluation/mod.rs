//! KITTI-style detection metrics: difficulty filtering, greedy matching,
//! forty-point interpolated AP, AOS and depth-bucketed evaluation.

mod ap;
mod difficulty;
mod matching;
mod rangewise;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{intersection_over_first, iou_2d, iou_3d, iou_bev};
use crate::kitti_io::{Category, ObjectLabel};

pub use ap::{ap_from_outcomes, PrecisionCurve, ScoredOutcome, RECALL_POSITIONS};
pub use difficulty::{difficulty_filter, Difficulty, GtStatus};
pub use matching::{match_detections, score_order, DetectionOutcome};
pub use rangewise::{bucket_centers, rangewise_eval, BucketResult, MAX_RANGE};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("IoU threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("bucket interval must be positive and finite, got {0}")]
    InvalidInterval(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    #[serde(rename = "2d")]
    Detect2D,
    Bev,
    #[serde(rename = "3d")]
    Detect3D,
    Aos,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::Detect2D, Task::Bev, Task::Detect3D, Task::Aos];

    pub fn as_str(&self) -> &'static str {
        match self {
            Task::Detect2D => "2d",
            Task::Bev => "bev",
            Task::Detect3D => "3d",
            Task::Aos => "aos",
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Task::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown task `{s}` (expected 2d, bev, 3d or aos)"))
    }
}

/// Standard KITTI overlap requirement: 0.7 for cars, 0.5 otherwise.
pub fn default_iou_threshold(category: Category) -> f64 {
    match category {
        Category::Car => 0.7,
        _ => 0.5,
    }
}

/// Half-open depth interval `[center - half_width, center + half_width)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthBucket {
    pub center: f64,
    pub half_width: f64,
}

impl DepthBucket {
    pub fn contains(&self, z: f64) -> bool {
        z >= self.center - self.half_width && z < self.center + self.half_width
    }
}

/// Order in which bucket membership and difficulty are applied to ground
/// truth in a bucketed evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BucketOrder {
    /// Classify by difficulty first; counted rows outside the bucket become
    /// ignored, so predictions near the bucket edge are not penalized.
    #[default]
    DifficultyFirst,
    /// Drop rows outside the bucket before classifying.
    BucketFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub task: Task,
    pub category: Category,
    pub iou_threshold: f64,
    pub difficulty: Difficulty,
    #[serde(default)]
    pub depth_bucket: Option<DepthBucket>,
    #[serde(default)]
    pub bucket_order: BucketOrder,
}

impl EvalConfig {
    pub fn new(task: Task, category: Category, difficulty: Difficulty) -> Self {
        Self {
            task,
            category,
            iou_threshold: default_iou_threshold(category),
            difficulty,
            depth_bucket: None,
            bucket_order: BucketOrder::default(),
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.iou_threshold = threshold;
        self
    }

    pub fn with_bucket(mut self, bucket: Option<DepthBucket>) -> Self {
        self.depth_bucket = bucket;
        self
    }

    fn validate(&self) -> Result<(), EvalError> {
        if self.iou_threshold > 0.0 && self.iou_threshold <= 1.0 {
            Ok(())
        } else {
            Err(EvalError::InvalidThreshold(self.iou_threshold))
        }
    }
}

/// Ground truth and predictions of one image.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Frame {
    pub gts: Vec<ObjectLabel>,
    pub preds: Vec<ObjectLabel>,
}

impl Frame {
    pub fn new(gts: Vec<ObjectLabel>, preds: Vec<ObjectLabel>) -> Self {
        Self { gts, preds }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedPair {
    pub frame: usize,
    pub gt: usize,
    pub pred: usize,
    pub iou: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct EvalCounts {
    /// Counted ground truth.
    pub num_gt: usize,
    /// Predictions of the category that took part (inside the bucket, if any).
    pub num_pred: usize,
    pub ignored_gt: usize,
    pub ignored_pred: usize,
    pub true_positives: usize,
    pub false_positives: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalFlag {
    /// No counted ground truth; AP is reported as 0.
    Undefined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    /// In `[0, 100]`.
    pub ap40: f64,
    pub precision_at_recall: Vec<f64>,
    pub matched_pairs: Vec<MatchedPair>,
    pub counts: EvalCounts,
    pub flag: Option<EvalFlag>,
    #[serde(skip)]
    pub outcomes: Vec<ScoredOutcome>,
}

struct FrameOutcome {
    outcomes: Vec<ScoredOutcome>,
    pairs: Vec<MatchedPair>,
    counts: EvalCounts,
}

fn gt_statuses(frame: &Frame, config: &EvalConfig) -> Vec<GtStatus> {
    frame
        .gts
        .iter()
        .map(|gt| {
            if gt.is_dont_care() {
                return GtStatus::Excluded;
            }
            let inside = config.depth_bucket.is_none_or(|b| b.contains(gt.depth()));
            match config.bucket_order {
                BucketOrder::BucketFirst if !inside => GtStatus::Excluded,
                _ => match difficulty_filter(gt, config.category, config.difficulty) {
                    GtStatus::Counted if !inside => GtStatus::Ignored,
                    status => status,
                },
            }
        })
        .collect()
}

fn overlap(task: Task, pred: &ObjectLabel, gt: &ObjectLabel) -> f64 {
    match task {
        Task::Detect2D | Task::Aos => iou_2d(&pred.box2d, &gt.box2d),
        Task::Bev => iou_bev(&pred.box3d(), &gt.box3d()),
        Task::Detect3D => iou_3d(&pred.box3d(), &gt.box3d()),
    }
}

fn evaluate_frame(frame_index: usize, frame: &Frame, config: &EvalConfig) -> FrameOutcome {
    let status = gt_statuses(frame, config);
    let kept: Vec<usize> = frame
        .preds
        .iter()
        .enumerate()
        .filter(|(_, p)| {
            p.category == config.category
                && config.depth_bucket.is_none_or(|b| b.contains(p.depth()))
        })
        .map(|(i, _)| i)
        .collect();

    let scores: Vec<f64> = kept.iter().map(|&i| frame.preds[i].score_or_one()).collect();
    let iou: Vec<Vec<f64>> = kept
        .iter()
        .map(|&i| {
            let pred = &frame.preds[i];
            frame
                .gts
                .iter()
                .zip(&status)
                .map(|(gt, s)| match s {
                    GtStatus::Excluded => 0.0,
                    _ => overlap(config.task, pred, gt),
                })
                .collect()
        })
        .collect();
    let dont_care: Vec<bool> = kept
        .iter()
        .map(|&i| {
            let pred = &frame.preds[i];
            frame.gts.iter().filter(|g| g.is_dont_care()).any(|g| {
                intersection_over_first(&pred.box2d, &g.box2d) >= config.iou_threshold
            })
        })
        .collect();

    let matched = match_detections(&status, &scores, &iou, &dont_care, config.iou_threshold);

    let mut counts = EvalCounts {
        num_gt: status.iter().filter(|s| **s == GtStatus::Counted).count(),
        num_pred: kept.len(),
        ignored_gt: frame
            .gts
            .iter()
            .zip(&status)
            .filter(|(g, s)| **s == GtStatus::Ignored && !g.is_dont_care())
            .count(),
        ..EvalCounts::default()
    };
    let mut outcomes = Vec::with_capacity(kept.len());
    let mut pairs = Vec::new();
    for (k, (&pred_index, outcome)) in kept.iter().zip(&matched).enumerate() {
        let pred = &frame.preds[pred_index];
        let similarity = match *outcome {
            DetectionOutcome::TruePositive { gt, iou } => {
                counts.true_positives += 1;
                pairs.push(MatchedPair {
                    frame: frame_index,
                    gt,
                    pred: pred_index,
                    iou,
                });
                if config.task == Task::Aos {
                    (1.0 + (pred.alpha - frame.gts[gt].alpha).cos()) / 2.0
                } else {
                    1.0
                }
            }
            DetectionOutcome::FalsePositive => {
                counts.false_positives += 1;
                1.0
            }
            DetectionOutcome::Ignored => {
                counts.ignored_pred += 1;
                1.0
            }
        };
        outcomes.push(ScoredOutcome {
            score: scores[k],
            frame: frame_index,
            index: pred_index,
            outcome: *outcome,
            similarity,
        });
    }
    FrameOutcome {
        outcomes,
        pairs,
        counts,
    }
}

/// Runs one evaluation over a dataset. Images are processed in parallel and
/// combined in frame order, so the result does not depend on scheduling.
///
/// With `Task::Aos` the returned `ap40` is the average orientation
/// similarity.
pub fn ap40(frames: &[Frame], config: &EvalConfig) -> Result<EvalResult, EvalError> {
    config.validate()?;
    let per_frame: Vec<FrameOutcome> = frames
        .par_iter()
        .enumerate()
        .map(|(i, f)| evaluate_frame(i, f, config))
        .collect();

    let mut counts = EvalCounts::default();
    let mut outcomes = Vec::new();
    let mut matched_pairs = Vec::new();
    for f in per_frame {
        counts.num_gt += f.counts.num_gt;
        counts.num_pred += f.counts.num_pred;
        counts.ignored_gt += f.counts.ignored_gt;
        counts.ignored_pred += f.counts.ignored_pred;
        counts.true_positives += f.counts.true_positives;
        counts.false_positives += f.counts.false_positives;
        outcomes.extend(f.outcomes);
        matched_pairs.extend(f.pairs);
    }
    let curve = ap_from_outcomes(&outcomes, counts.num_gt);
    Ok(EvalResult {
        ap40: 100.0 * curve.ap,
        precision_at_recall: curve.precision,
        matched_pairs,
        counts,
        flag: (counts.num_gt == 0).then_some(EvalFlag::Undefined),
        outcomes,
    })
}

/// Average orientation similarity: `config` with its task forced to AOS.
pub fn aos(frames: &[Frame], config: &EvalConfig) -> Result<EvalResult, EvalError> {
    ap40(
        frames,
        &EvalConfig {
            task: Task::Aos,
            ..*config
        },
    )
}
