use nalgebra::Point2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pairing::{pair_by_box2d, Pair};
use super::{DiagnosisError, DiagnosisFrame, PAIRING_IOU};
use crate::evaluation::Frame;
use crate::geometry::{back_project, project, Box3D, ReferencePoint};
use crate::kitti_io::{Calibration, ObjectLabel, RawHeadOutputs};
use crate::losses::rotation_y_to_alpha;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstitutionDirection {
    /// Predictions with one field taken from the matched ground truth.
    PredWithGt,
    /// Ground truth with one field taken from the matched prediction.
    GtWithPred,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstitutedField {
    ProjCenter,
    Depth,
    Location3D,
    Size3D,
    Orientation,
}

impl SubstitutedField {
    pub const ALL: [SubstitutedField; 5] = [
        SubstitutedField::ProjCenter,
        SubstitutedField::Depth,
        SubstitutedField::Location3D,
        SubstitutedField::Size3D,
        SubstitutedField::Orientation,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            SubstitutedField::ProjCenter => "proj. center",
            SubstitutedField::Depth => "depth",
            SubstitutedField::Location3D => "3D location",
            SubstitutedField::Size3D => "3D size",
            SubstitutedField::Orientation => "orientation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubstitutionSpec {
    pub direction: SubstitutionDirection,
    pub field: SubstitutedField,
}

impl SubstitutionSpec {
    pub fn with_gt(field: SubstitutedField) -> Self {
        Self {
            direction: SubstitutionDirection::PredWithGt,
            field,
        }
    }

    pub fn without_gt(field: SubstitutedField) -> Self {
        Self {
            direction: SubstitutionDirection::GtWithPred,
            field,
        }
    }

    /// Row label, e.g. `w/ gt depth` or `w/o gt 3D size`.
    pub fn label(&self) -> String {
        let prefix = match self.direction {
            SubstitutionDirection::PredWithGt => "w/",
            SubstitutionDirection::GtWithPred => "w/o",
        };
        format!("{prefix} gt {}", self.field.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubstituteOptions {
    /// Minimum 2D IoU for pairing predictions with ground truth.
    pub pairing_iou: f64,
    /// Point of the 3D box whose projection is the projected center.
    pub reference: ReferencePoint,
}

impl Default for SubstituteOptions {
    fn default() -> Self {
        Self {
            pairing_iou: PAIRING_IOU,
            reference: ReferencePoint::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SubstitutionMeta {
    pub matched: usize,
    /// Ground truth without a partner. In the `GtWithPred` direction these
    /// keep their own values.
    pub unmatched_gt: usize,
    pub unmatched_pred: usize,
    /// Objects whose predicted projected center had to be recovered by
    /// projecting the predicted 3D location (no raw head outputs).
    pub degraded_objects: usize,
    /// Pairs left unchanged because a center could not be projected or
    /// back-projected.
    pub skipped: usize,
}

impl SubstitutionMeta {
    pub fn degraded(&self) -> bool {
        self.degraded_objects > 0
    }

    fn merge(&mut self, other: &SubstitutionMeta) {
        self.matched += other.matched;
        self.unmatched_gt += other.unmatched_gt;
        self.unmatched_pred += other.unmatched_pred;
        self.degraded_objects += other.degraded_objects;
        self.skipped += other.skipped;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubstitutionOutput {
    /// Original ground truth with the hybrid detections as predictions.
    pub frames: Vec<Frame>,
    pub meta: SubstitutionMeta,
}

#[derive(Default)]
struct FieldSet {
    proj_center: bool,
    depth: bool,
    location: bool,
    size: bool,
    orientation: bool,
}

impl FieldSet {
    fn from_specs(specs: &[SubstitutionSpec]) -> Self {
        let mut set = FieldSet::default();
        for s in specs {
            match s.field {
                SubstitutedField::ProjCenter => set.proj_center = true,
                SubstitutedField::Depth => set.depth = true,
                SubstitutedField::Location3D => set.location = true,
                SubstitutedField::Size3D => set.size = true,
                SubstitutedField::Orientation => set.orientation = true,
            }
        }
        set
    }

    fn needs_centers(&self) -> bool {
        !self.location && (self.proj_center || self.depth)
    }
}

/// Projected center and depth of one object: taken from raw head outputs
/// when present, otherwise recovered from the 3D box.
struct CenterDepth {
    center: Point2<f64>,
    depth: f64,
    derived: bool,
}

fn center_depth(
    label: &ObjectLabel,
    raw: Option<&RawHeadOutputs>,
    calib: &Calibration,
    reference: ReferencePoint,
) -> Option<CenterDepth> {
    match raw {
        Some(r) => Some(CenterDepth {
            center: r.projected_center(),
            depth: r.depth,
            derived: false,
        }),
        None => {
            let center = project(&label.box3d().reference_point(reference), calib).ok()?;
            Some(CenterDepth {
                center,
                depth: label.depth(),
                derived: true,
            })
        }
    }
}

/// Copies the fields in `fields` from `donor` onto `base`.
///
/// `base_raw` and `donor_raw` are the raw head outputs behind each object, if
/// any; `pred_is_base` tells which side is the prediction. Returns `None`
/// when a required center is unavailable, and otherwise the new object plus
/// whether the prediction's center had to be derived from its 3D box.
#[allow(clippy::too_many_arguments)]
fn transplant(
    base: &ObjectLabel,
    base_raw: Option<&RawHeadOutputs>,
    donor: &ObjectLabel,
    donor_raw: Option<&RawHeadOutputs>,
    pred_is_base: bool,
    fields: &FieldSet,
    calib: &Calibration,
    reference: ReferencePoint,
) -> Option<(ObjectLabel, bool)> {
    let mut out = base.clone();
    let mut derived = false;
    if fields.size {
        out.dims = donor.dims;
    }
    if fields.orientation {
        out.rotation_y = donor.rotation_y;
    }
    if fields.location {
        out.location = donor.location;
    } else if fields.needs_centers() {
        let from_base = center_depth(base, base_raw, calib, reference)?;
        let from_donor = center_depth(donor, donor_raw, calib, reference)?;
        let center = if fields.proj_center { from_donor.center } else { from_base.center };
        let depth = if fields.depth { from_donor.depth } else { from_base.depth };
        derived = if pred_is_base {
            !fields.proj_center && from_base.derived
        } else {
            fields.proj_center && from_donor.derived
        };
        let point = back_project(&center, depth, calib).ok()?;
        out.location = Box3D::location_from_reference(point, out.dims.h, reference);
    }
    if fields.location || fields.needs_centers() || fields.orientation {
        out.alpha = rotation_y_to_alpha(out.rotation_y, out.location.x, out.location.z);
    }
    Some((out, derived))
}

fn substitute_frame(
    frame: &DiagnosisFrame,
    direction: SubstitutionDirection,
    fields: &FieldSet,
    options: &SubstituteOptions,
) -> (Frame, SubstitutionMeta) {
    let pairs: Vec<Pair> = pair_by_box2d(&frame.gts, &frame.preds, options.pairing_iou);
    let countable_gts = frame.gts.iter().filter(|g| !g.is_dont_care()).count();
    let countable_preds = frame.preds.iter().filter(|p| !p.is_dont_care()).count();
    let mut meta = SubstitutionMeta {
        matched: pairs.len(),
        unmatched_gt: countable_gts - pairs.len(),
        unmatched_pred: countable_preds - pairs.len(),
        ..SubstitutionMeta::default()
    };
    let raw_of = |i: usize| frame.raw.as_ref().map(|r| &r[i]);

    let preds = match direction {
        SubstitutionDirection::PredWithGt => {
            let mut preds = frame.preds.clone();
            for pair in &pairs {
                let pred = &frame.preds[pair.pred];
                match transplant(
                    pred,
                    raw_of(pair.pred),
                    &frame.gts[pair.gt],
                    None,
                    true,
                    fields,
                    &frame.calib,
                    options.reference,
                ) {
                    Some((object, derived)) => {
                        meta.degraded_objects += derived as usize;
                        preds[pair.pred] = object;
                    }
                    None => meta.skipped += 1,
                }
            }
            preds
        }
        SubstitutionDirection::GtWithPred => {
            let mut partner = vec![None; frame.gts.len()];
            for pair in &pairs {
                partner[pair.gt] = Some(pair.pred);
            }
            frame
                .gts
                .iter()
                .zip(&partner)
                .filter(|(g, _)| !g.is_dont_care())
                .map(|(gt, partner)| {
                    let base = ObjectLabel {
                        score: Some(1.0),
                        ..gt.clone()
                    };
                    let Some(p) = *partner else {
                        return base;
                    };
                    match transplant(
                        &base,
                        None,
                        &frame.preds[p],
                        raw_of(p),
                        false,
                        fields,
                        &frame.calib,
                        options.reference,
                    ) {
                        Some((object, derived)) => {
                            meta.degraded_objects += derived as usize;
                            object
                        }
                        None => {
                            meta.skipped += 1;
                            base
                        }
                    }
                })
                .collect()
        }
    };
    (Frame::new(frame.gts.clone(), preds), meta)
}

/// Builds hybrid detections that combine predicted and ground-truth fields.
///
/// All specs must share one direction. With an empty list the predictions
/// are returned unchanged. Pairing is by 2D IoU, greedy by score, within a
/// category.
pub fn substitute(
    frames: &[DiagnosisFrame],
    specs: &[SubstitutionSpec],
    options: &SubstituteOptions,
) -> Result<SubstitutionOutput, DiagnosisError> {
    for (i, f) in frames.iter().enumerate() {
        if let Some(raw) = &f.raw {
            if raw.len() != f.preds.len() {
                return Err(DiagnosisError::RawLengthMismatch {
                    frame: i,
                    preds: f.preds.len(),
                    raw: raw.len(),
                });
            }
        }
    }
    let Some(first) = specs.first() else {
        return Ok(SubstitutionOutput {
            frames: frames
                .iter()
                .map(|f| Frame::new(f.gts.clone(), f.preds.clone()))
                .collect(),
            meta: SubstitutionMeta::default(),
        });
    };
    if specs.iter().any(|s| s.direction != first.direction) {
        return Err(DiagnosisError::MixedDirections);
    }
    let fields = FieldSet::from_specs(specs);
    let results: Vec<(Frame, SubstitutionMeta)> = frames
        .par_iter()
        .map(|f| substitute_frame(f, first.direction, &fields, options))
        .collect();

    let mut meta = SubstitutionMeta::default();
    let mut out = Vec::with_capacity(results.len());
    for (frame, m) in results {
        meta.merge(&m);
        out.push(frame);
    }
    if meta.matched == 0 {
        return Err(DiagnosisError::NoMatches);
    }
    Ok(SubstitutionOutput { frames: out, meta })
}
