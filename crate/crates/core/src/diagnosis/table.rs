use rayon::prelude::*;
use serde::Serialize;

use super::{
    substitute, DiagnosisError, DiagnosisFrame, SubstituteOptions, SubstitutedField, SubstitutionMeta,
    SubstitutionSpec,
};
use crate::evaluation::{ap40, Difficulty, EvalConfig, Task};
use crate::geometry::ReferencePoint;
use crate::kitti_io::Category;

pub const BASELINE_LABEL: &str = "baseline";
pub const GROUND_TRUTH_LABEL: &str = "ground truth";

/// 3D AP40 for cars at moderate difficulty, IoU 0.7.
pub fn substitution_config() -> EvalConfig {
    EvalConfig::new(Task::Detect3D, Category::Car, Difficulty::Moderate)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosisRow {
    pub label: String,
    pub specs: Vec<SubstitutionSpec>,
    pub ap40: f64,
    pub meta: SubstitutionMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosisReport {
    pub config: EvalConfig,
    pub reference: ReferencePoint,
    /// Some image had no raw head outputs, so predicted projected centers
    /// were recovered from predicted 3D boxes.
    pub degraded: bool,
    pub rows: Vec<DiagnosisRow>,
    pub baseline_ap: f64,
    pub gt_ceiling_ap: f64,
}

impl DiagnosisReport {
    pub fn row(&self, label: &str) -> Option<&DiagnosisRow> {
        self.rows.iter().find(|r| r.label == label)
    }
}

/// Row labels and substitution lists, in table order: the baseline, five
/// `w/ gt` rows, five `w/o gt` rows and the full ground-truth ceiling.
pub fn substitution_rows() -> Vec<(String, Vec<SubstitutionSpec>)> {
    let mut rows = vec![(BASELINE_LABEL.to_string(), Vec::new())];
    for make in [SubstitutionSpec::with_gt, SubstitutionSpec::without_gt] {
        for field in SubstitutedField::ALL {
            let spec = make(field);
            rows.push((spec.label(), vec![spec]));
        }
    }
    rows.push((
        GROUND_TRUTH_LABEL.to_string(),
        SubstitutedField::ALL.into_iter().map(SubstitutionSpec::with_gt).collect(),
    ));
    rows
}

/// Evaluates every row of [`substitution_rows`] with `config`.
pub fn run_substitution_table(
    frames: &[DiagnosisFrame],
    config: &EvalConfig,
    options: &SubstituteOptions,
) -> Result<DiagnosisReport, DiagnosisError> {
    let rows: Vec<DiagnosisRow> = substitution_rows()
        .into_par_iter()
        .map(|(label, specs)| {
            let out = substitute(frames, &specs, options)?;
            let result = ap40(&out.frames, config)?;
            Ok(DiagnosisRow {
                label,
                specs,
                ap40: result.ap40,
                meta: out.meta,
            })
        })
        .collect::<Result<_, DiagnosisError>>()?;
    let ap_of = |label: &str| rows.iter().find(|r| r.label == label).map_or(0.0, |r| r.ap40);
    Ok(DiagnosisReport {
        config: *config,
        reference: options.reference,
        degraded: frames.iter().any(|f| f.raw.is_none()),
        baseline_ap: ap_of(BASELINE_LABEL),
        gt_ceiling_ap: ap_of(GROUND_TRUTH_LABEL),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_rows_with_expected_labels() {
        let labels: Vec<String> = substitution_rows().into_iter().map(|(l, _)| l).collect();
        assert_eq!(
            labels,
            [
                "baseline",
                "w/ gt proj. center",
                "w/ gt depth",
                "w/ gt 3D location",
                "w/ gt 3D size",
                "w/ gt orientation",
                "w/o gt proj. center",
                "w/o gt depth",
                "w/o gt 3D location",
                "w/o gt 3D size",
                "w/o gt orientation",
                "ground truth",
            ]
        );
    }
}
