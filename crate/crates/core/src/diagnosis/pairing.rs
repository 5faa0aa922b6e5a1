use crate::evaluation::score_order;
use crate::geometry::iou_2d;
use crate::kitti_io::ObjectLabel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub pred: usize,
    pub gt: usize,
    pub iou: f64,
}

/// Pairs predictions with ground truth of the same category: predictions in
/// descending score order each take the free ground truth with the highest
/// 2D IoU, provided it reaches `min_iou`. DontCare rows never pair.
pub fn pair_by_box2d(gts: &[ObjectLabel], preds: &[ObjectLabel], min_iou: f64) -> Vec<Pair> {
    let scores: Vec<f64> = preds.iter().map(ObjectLabel::score_or_one).collect();
    let mut taken = vec![false; gts.len()];
    let mut pairs = Vec::new();
    for p in score_order(&scores) {
        let pred = &preds[p];
        if pred.is_dont_care() {
            continue;
        }
        let best = gts
            .iter()
            .enumerate()
            .filter(|(g, gt)| !taken[*g] && !gt.is_dont_care() && gt.category == pred.category)
            .map(|(g, gt)| (g, iou_2d(&pred.box2d, &gt.box2d)))
            .filter(|(_, iou)| *iou >= min_iou)
            .fold(None, |best: Option<(usize, f64)>, cand| match best {
                Some(b) if b.1 >= cand.1 => Some(b),
                _ => Some(cand),
            });
        if let Some((g, iou)) = best {
            taken[g] = true;
            pairs.push(Pair { pred: p, gt: g, iou });
        }
    }
    pairs
}
