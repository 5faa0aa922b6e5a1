use super::{Box2D, Box3D, Dimensions};

fn ratio(intersection: f64, union: f64) -> f64 {
    if !(union > 0.0) || !(intersection > 0.0) {
        return 0.0;
    }
    (intersection / union).clamp(0.0, 1.0)
}

/// Rectangle IoU. Zero-area boxes give 0.
pub fn iou_2d(a: &Box2D, b: &Box2D) -> f64 {
    let inter = a.intersection_area(b);
    ratio(inter, a.area() + b.area() - inter)
}

/// Intersection of `b` with `a`, relative to the area of `a`.
pub fn intersection_over_first(a: &Box2D, b: &Box2D) -> f64 {
    ratio(a.intersection_area(b), a.area())
}

/// Overlap of the two vertical slabs `[y - h, y]`.
pub fn vertical_overlap(a: &Box3D, b: &Box3D) -> f64 {
    (a.y_max().min(b.y_max()) - a.y_min().max(b.y_min())).max(0.0)
}

pub fn bev_intersection_area(a: &Box3D, b: &Box3D) -> f64 {
    a.bev_polygon().intersection_area(&b.bev_polygon())
}

/// IoU of the rotated ground-plane footprints.
pub fn iou_bev(a: &Box3D, b: &Box3D) -> f64 {
    let area_a = a.dims.w * a.dims.l;
    let area_b = b.dims.w * b.dims.l;
    let inter = bev_intersection_area(a, b);
    ratio(inter, area_a + area_b - inter)
}

/// Volumetric IoU of two yaw-only boxes: footprint intersection times
/// vertical overlap.
pub fn iou_3d(a: &Box3D, b: &Box3D) -> f64 {
    let overlap_h = vertical_overlap(a, b);
    if overlap_h <= 0.0 {
        return 0.0;
    }
    let inter = bev_intersection_area(a, b) * overlap_h;
    ratio(inter, a.volume() + b.volume() - inter)
}

/// 3D IoU of two boxes that differ only in size, sharing center, yaw and
/// the anchoring face: `Π min(sᵢ, s*ᵢ) / (V + V* − Π min(sᵢ, s*ᵢ))`.
pub fn iou_3d_axis_aligned(s: &Dimensions, s_star: &Dimensions) -> f64 {
    let inter = s.h.min(s_star.h) * s.w.min(s_star.w) * s.l.min(s_star.l);
    ratio(inter, s.volume() + s_star.volume() - inter)
}
