//! Training losses and weights, each with an analytic gradient that the
//! [`gradcheck`] suite verifies against central differences.

mod angle;
mod depth;
pub mod gradcheck;
mod heading;
mod size;
mod weight;

pub use angle::{alpha_to_rotation_y, angular_distance, normalize_angle, rotation_y_to_alpha};
pub use depth::{depth_loss_gaussian, depth_loss_laplace, DepthLoss, DepthPrediction};
pub use heading::{
    bin_center, heading_decode, heading_encode, heading_from_logits, heading_loss, HeadingEncoding,
    HeadingLoss, BIN_WIDTH,
};
pub use size::{
    iou_partial_ratio, size_loss_compensated, size_loss_iou, size_loss_l1, CompensatedSizeLoss,
    IouPartials, SizeLoss, SizeRegime, SizeTriple, SIZE_EPSILON,
};
pub use weight::{sample_weight, SampleWeightParams};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LossError {
    #[error("size component {value} is not above the degeneracy threshold")]
    DegenerateSize { value: f64 },
    #[error("uncertainty scale must be positive, got {value}")]
    InvalidSigma { value: f64 },
    #[error("expected 12 heading logits, found {found}")]
    WrongLogitCount { found: usize },
    #[error("invalid sample-weight parameters: {0}")]
    InvalidWeightParams(&'static str),
    #[error("property checks need at least one trial")]
    NoTrials,
}
