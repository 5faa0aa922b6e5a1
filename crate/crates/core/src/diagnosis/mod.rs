//! Error analysis: swapping individual predicted fields for ground truth
//! (and the reverse), localization error induced by center shifts, and
//! depth-bucketed misalignment and depth-error statistics.

mod localization;
mod pairing;
mod stats;
mod substitute;
mod table;

use crate::evaluation::EvalError;
use crate::kitti_io::{Calibration, ObjectLabel, RawHeadOutputs};

pub use localization::{
    iou_tolerance, loc_error_from_shift, loc_error_table, max_shift_for_iou, LocErrorTable, DEFAULT_FOCAL,
    MEAN_CAR_SHAPE, STANDARD_DEPTHS, STANDARD_SHIFTS,
};
pub use pairing::{pair_by_box2d, Pair};
pub use stats::{bucket_stats, depth_error_stats, misalignment_stats, DepthBucketStats, MisalignmentReport};
pub use substitute::{
    substitute, SubstituteOptions, SubstitutedField, SubstitutionDirection, SubstitutionMeta,
    SubstitutionOutput, SubstitutionSpec,
};
pub use table::{
    run_substitution_table, substitution_config, substitution_rows, DiagnosisReport, DiagnosisRow, BASELINE_LABEL, GROUND_TRUTH_LABEL,
};

/// 2D IoU needed to pair a prediction with ground truth for diagnosis.
pub const PAIRING_IOU: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DiagnosisError {
    #[error("substitution specs mix both directions")]
    MixedDirections,
    #[error("no prediction could be paired with ground truth")]
    NoMatches,
    #[error("image {frame}: {raw} raw output records for {preds} predictions")]
    RawLengthMismatch { frame: usize, preds: usize, raw: usize },
    #[error("bucket interval must be positive and finite, got {0}")]
    InvalidInterval(f64),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// One image prepared for diagnosis.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosisFrame {
    pub gts: Vec<ObjectLabel>,
    pub preds: Vec<ObjectLabel>,
    pub calib: Calibration,
    /// Record `i` belongs to `preds[i]`.
    pub raw: Option<Vec<RawHeadOutputs>>,
}
