use serde::Serialize;

use super::GtStatus;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectionOutcome {
    TruePositive { gt: usize, iou: f64 },
    FalsePositive,
    /// Overlaps only ignored ground truth or a DontCare region.
    Ignored,
}

/// Indices of `scores` by descending score, ties broken by index.
pub fn score_order(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

/// Greedy matching within one image.
///
/// Predictions are visited by descending score (ties by index). Each claims
/// the unclaimed `Counted` ground truth with the highest `iou[pred][gt]` at
/// or above `threshold`. A prediction with no such partner is `Ignored` when
/// it reaches `threshold` against an `Ignored` ground truth or when
/// `dont_care[pred]` is set, and a false positive otherwise.
///
/// Returns one outcome per prediction, in input order.
pub fn match_detections(
    gt_status: &[GtStatus],
    scores: &[f64],
    iou: &[Vec<f64>],
    dont_care: &[bool],
    threshold: f64,
) -> Vec<DetectionOutcome> {
    let mut claimed = vec![false; gt_status.len()];
    let mut outcomes = vec![DetectionOutcome::FalsePositive; scores.len()];
    for p in score_order(scores) {
        let row = &iou[p];
        let mut best: Option<(usize, f64)> = None;
        let mut touches_ignored = false;
        for (g, status) in gt_status.iter().enumerate() {
            let overlap = row[g];
            if overlap < threshold {
                continue;
            }
            match status {
                GtStatus::Counted if !claimed[g] => {
                    if best.is_none_or(|(_, b)| overlap > b) {
                        best = Some((g, overlap));
                    }
                }
                GtStatus::Ignored => touches_ignored = true,
                _ => {}
            }
        }
        outcomes[p] = match best {
            Some((g, overlap)) => {
                claimed[g] = true;
                DetectionOutcome::TruePositive { gt: g, iou: overlap }
            }
            None if touches_ignored || dont_care[p] => DetectionOutcome::Ignored,
            None => DetectionOutcome::FalsePositive,
        };
    }
    outcomes
}
