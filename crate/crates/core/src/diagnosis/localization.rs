use serde::Serialize;

use crate::geometry::Dimensions;

/// Focal length (pixels) of the usual KITTI left color camera.
pub const DEFAULT_FOCAL: f64 = 707.05;

/// Average car size `(h, w, l)` in meters.
pub const MEAN_CAR_SHAPE: Dimensions = Dimensions::new(1.53, 1.63, 3.53);

/// Image-plane center shifts `(du, dv)` in pixels for the standard table.
pub const STANDARD_SHIFTS: [(f64, f64); 6] = [
    (2.0, 2.0),
    (4.0, 2.0),
    (6.0, 2.0),
    (6.0, 4.0),
    (8.0, 2.0),
    (8.0, 6.0),
];

pub const STANDARD_DEPTHS: [f64; 5] = [5.0, 10.0, 20.0, 40.0, 60.0];

/// 3D displacement caused by moving the projected center by `(du, dv)`
/// pixels at depth `z`: `z · √(du² + dv²) / fu`.
pub fn loc_error_from_shift(du: f64, dv: f64, z: f64, fu: f64) -> f64 {
    z * du.hypot(dv) / fu
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocErrorTable {
    pub focal: f64,
    pub shifts: Vec<(f64, f64)>,
    pub depths: Vec<f64>,
    /// `cells[i][j]` is the error for `shifts[i]` at `depths[j]`.
    pub cells: Vec<Vec<f64>>,
}

pub fn loc_error_table(shifts: &[(f64, f64)], depths: &[f64], focal: f64) -> LocErrorTable {
    let cells = shifts
        .iter()
        .map(|&(du, dv)| depths.iter().map(|&z| loc_error_from_shift(du, dv, z, focal)).collect())
        .collect();
    LocErrorTable {
        focal,
        shifts: shifts.to_vec(),
        depths: depths.to_vec(),
        cells,
    }
}

/// 3D IoU of two identical, co-oriented boxes of length `length` offset by
/// `delta` along that length: `(length − Δ) / (length + Δ)`, or 0 once the
/// boxes no longer overlap.
pub fn iou_tolerance(delta: f64, length: f64) -> f64 {
    let delta = delta.abs();
    if delta >= length {
        0.0
    } else {
        (length - delta) / (length + delta)
    }
}

/// Largest lengthwise shift that still keeps the IoU at `iou`:
/// `length · (1 − iou) / (1 + iou)`.
pub fn max_shift_for_iou(iou: f64, length: f64) -> f64 {
    length * (1.0 - iou) / (1.0 + iou)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_shift_is_zero() {
        assert_eq!(loc_error_from_shift(0.0, 0.0, 60.0, DEFAULT_FOCAL), 0.0);
    }

    #[test]
    fn linear_in_depth() {
        let a = loc_error_from_shift(6.0, 4.0, 20.0, DEFAULT_FOCAL);
        let b = loc_error_from_shift(6.0, 4.0, 40.0, DEFAULT_FOCAL);
        assert!((b - 2.0 * a).abs() < 1e-15);
    }

    #[test]
    fn three_four_five() {
        assert!((loc_error_from_shift(3.0, 4.0, 10.0, 50.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tolerance_edges() {
        assert_eq!(iou_tolerance(0.0, 3.53), 1.0);
        assert_eq!(iou_tolerance(3.53, 3.53), 0.0);
        assert_eq!(iou_tolerance(5.0, 3.53), 0.0);
    }

    #[test]
    fn shift_for_seventy_percent_rounds_to_sixty_two_cm() {
        let d = max_shift_for_iou(0.7, MEAN_CAR_SHAPE.l);
        assert!((d - 0.6229).abs() < 1e-4);
        assert!((iou_tolerance(d, MEAN_CAR_SHAPE.l) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn table_shape() {
        let t = loc_error_table(&STANDARD_SHIFTS, &STANDARD_DEPTHS, DEFAULT_FOCAL);
        assert_eq!(t.cells.len(), 6);
        assert!(t.cells.iter().all(|r| r.len() == 5));
    }
}
