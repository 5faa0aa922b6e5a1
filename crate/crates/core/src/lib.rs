//! Geometry, metrics, losses and error analysis for monocular 3D object
//! detection on KITTI-format data.
//!
//! The crate reads KITTI labels, calibration and an optional sidecar of raw
//! detector head outputs ([`kitti_io`]), computes 2D, bird's-eye-view and 3D
//! IoU ([`geometry`]), scores detections with forty-point AP and AOS
//! ([`evaluation`]), implements the training losses with checked analytic
//! gradients ([`losses`]) and diagnoses which predicted quantity limits
//! accuracy ([`diagnosis`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnosis;
pub mod evaluation;
pub mod geometry;
pub mod kitti_io;
pub mod losses;
pub mod report;
pub mod synthetic;

pub use diagnosis::{
    iou_tolerance, loc_error_from_shift, misalignment_stats, run_substitution_table, substitute, DiagnosisFrame,
    DiagnosisReport, SubstitutionSpec,
};
pub use evaluation::{ap40, aos, rangewise_eval, Difficulty, EvalConfig, EvalResult, Frame, Task};
pub use geometry::{iou_2d, iou_3d, iou_bev, Box2D, Box3D, Dimensions, ReferencePoint};
pub use kitti_io::{
    parse_calib_file, parse_label_file, parse_raw_outputs, write_label_file, Calibration, Category,
    ObjectLabel, RawHeadOutputs,
};
pub use losses::{sample_weight, SampleWeightParams};
