use serde::Serialize;

use super::DetectionOutcome;

pub const RECALL_POSITIONS: usize = 40;

/// One non-ignored prediction after matching, ready for the precision/recall
/// sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoredOutcome {
    pub score: f64,
    pub frame: usize,
    pub index: usize,
    pub outcome: DetectionOutcome,
    /// Credit given to a true positive: 1 for detection AP, the orientation
    /// similarity for AOS.
    pub similarity: f64,
}

impl ScoredOutcome {
    fn is_tp(&self) -> bool {
        matches!(self.outcome, DetectionOutcome::TruePositive { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecisionCurve {
    pub ap: f64,
    /// Interpolated precision at recall `k/40`, `k = 1..=40`.
    pub precision: Vec<f64>,
}

/// Average precision over the forty recall positions `1/40 .. 40/40`.
///
/// Predictions are swept by descending score (ties by frame, then index).
/// Every distinct score is a cutoff; at a cutoff with `tp` hits and `fp`
/// misses the precision is `Σ similarity / (tp + fp)`. The interpolated
/// precision at a recall position is the best precision among cutoffs whose
/// recall reaches it, or 0 when none does. Ignored outcomes are skipped.
///
/// With `num_gt == 0` every position is 0.
pub fn ap_from_outcomes(outcomes: &[ScoredOutcome], num_gt: usize) -> PrecisionCurve {
    let mut sorted: Vec<&ScoredOutcome> = outcomes
        .iter()
        .filter(|o| !matches!(o.outcome, DetectionOutcome::Ignored))
        .collect();
    sorted.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.frame.cmp(&b.frame))
            .then(a.index.cmp(&b.index))
    });

    let mut cutoffs: Vec<(usize, f64)> = Vec::new();
    let (mut tp, mut fp, mut credit) = (0usize, 0usize, 0.0f64);
    for (i, o) in sorted.iter().enumerate() {
        if o.is_tp() {
            tp += 1;
            credit += o.similarity;
        } else {
            fp += 1;
        }
        let last_of_score = sorted.get(i + 1).is_none_or(|next| next.score != o.score);
        if last_of_score {
            cutoffs.push((tp, credit / (tp + fp) as f64));
        }
    }

    let mut best_after = vec![0.0f64; cutoffs.len() + 1];
    for i in (0..cutoffs.len()).rev() {
        best_after[i] = best_after[i + 1].max(cutoffs[i].1);
    }

    let mut precision = vec![0.0; RECALL_POSITIONS];
    if num_gt > 0 {
        let mut first = 0;
        for (k, slot) in precision.iter_mut().enumerate() {
            let needed = k + 1;
            while first < cutoffs.len() && cutoffs[first].0 * RECALL_POSITIONS < needed * num_gt {
                first += 1;
            }
            *slot = best_after[first];
        }
    }
    let ap = precision.iter().sum::<f64>() / RECALL_POSITIONS as f64;
    PrecisionCurve { ap, precision }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(score: f64, index: usize) -> ScoredOutcome {
        ScoredOutcome {
            score,
            frame: 0,
            index,
            outcome: DetectionOutcome::TruePositive { gt: index, iou: 1.0 },
            similarity: 1.0,
        }
    }

    fn fp(score: f64, index: usize) -> ScoredOutcome {
        ScoredOutcome {
            outcome: DetectionOutcome::FalsePositive,
            ..tp(score, index)
        }
    }

    #[test]
    fn perfect_single() {
        let c = ap_from_outcomes(&[tp(0.9, 0)], 1);
        assert_eq!(c.ap, 1.0);
    }

    #[test]
    fn half_recall() {
        let c = ap_from_outcomes(&[tp(0.9, 0)], 2);
        assert!((c.ap - 0.5).abs() < 1e-15);
        assert_eq!(c.precision[19], 1.0);
        assert_eq!(c.precision[20], 0.0);
    }

    #[test]
    fn false_positive_above_true_positive() {
        let c = ap_from_outcomes(&[fp(0.9, 0), tp(0.8, 1)], 1);
        assert!((c.ap - 0.5).abs() < 1e-15);
    }

    #[test]
    fn false_positive_below_is_free() {
        let c = ap_from_outcomes(&[tp(0.9, 0), fp(0.1, 1)], 1);
        assert_eq!(c.ap, 1.0);
    }

    #[test]
    fn tied_scores_form_one_cutoff() {
        let c = ap_from_outcomes(&[fp(0.5, 0), tp(0.5, 1)], 1);
        assert!((c.ap - 0.5).abs() < 1e-15);
    }

    #[test]
    fn no_ground_truth_is_zero() {
        let c = ap_from_outcomes(&[fp(0.5, 0)], 0);
        assert_eq!(c.ap, 0.0);
    }

    #[test]
    fn interpolation_takes_later_maximum() {
        // tp fp tp with 2 gt: precision 1, 1/2, 2/3 at recall 1/2, 1/2, 1
        let c = ap_from_outcomes(&[tp(0.9, 0), fp(0.8, 1), tp(0.7, 2)], 2);
        let expected = (20.0 * 1.0 + 20.0 * (2.0 / 3.0)) / 40.0;
        assert!((c.ap - expected).abs() < 1e-12);
    }

    #[test]
    fn similarity_scales_precision() {
        let mut o = tp(0.9, 0);
        o.similarity = 0.5;
        let c = ap_from_outcomes(&[o], 1);
        assert!((c.ap - 0.5).abs() < 1e-15);
    }
}
