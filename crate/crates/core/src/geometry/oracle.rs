//! Deterministic grid-sampling estimate of 3D IoU, used to validate the
//! analytic path. It shares no code with the polygon clipper.

use nalgebra::{Point2, Point3};

use super::Box3D;

pub const MIN_ORACLE_RESOLUTION: usize = 32;

fn sample(lo: f64, hi: f64, resolution: usize, i: usize) -> f64 {
    lo + (hi - lo) * (i as f64 + 0.5) / resolution as f64
}

fn inside_footprint(b: &Box3D, p: &Point2<f64>) -> bool {
    let dx = p.x - b.location.x;
    let dz = p.y - b.location.z;
    let (s, c) = b.yaw.sin_cos();
    let local_x = c * dx - s * dz;
    let local_z = s * dx + c * dz;
    local_x.abs() <= 0.5 * b.dims.l && local_z.abs() <= 0.5 * b.dims.w
}

fn union_aabb(a: &Box3D, b: &Box3D) -> (Point3<f64>, Point3<f64>) {
    let (alo, ahi) = a.aabb();
    let (blo, bhi) = b.aabb();
    (alo.inf(&blo), ahi.sup(&bhi))
}

/// Samples the cell centers of a `resolution³` grid spanning the union's
/// bounding volume and returns `#inside both / #inside either`.
///
/// Counting runs column by column: a grid point is inside a box exactly when
/// its `(x, z)` column is inside the footprint and its `y` sample is inside
/// the slab, so each column contributes products of per-axis counts. The
/// totals are identical to testing all `resolution³` points one by one.
///
/// `resolution` is raised to [`MIN_ORACLE_RESOLUTION`] if smaller.
pub fn iou_3d_oracle(a: &Box3D, b: &Box3D, resolution: usize) -> f64 {
    let n = resolution.max(MIN_ORACLE_RESOLUTION);
    let (lo, hi) = union_aabb(a, b);

    let (mut n_a, mut n_b, mut n_ab) = (0u64, 0u64, 0u64);
    for k in 0..n {
        let y = sample(lo.y, hi.y, n, k);
        let in_a = y >= a.y_min() && y <= a.y_max();
        let in_b = y >= b.y_min() && y <= b.y_max();
        n_a += in_a as u64;
        n_b += in_b as u64;
        n_ab += (in_a && in_b) as u64;
    }

    let (mut both, mut either) = (0u64, 0u64);
    for i in 0..n {
        let x = sample(lo.x, hi.x, n, i);
        for j in 0..n {
            let column = Point2::new(x, sample(lo.z, hi.z, n, j));
            let in_a = inside_footprint(a, &column);
            let in_b = inside_footprint(b, &column);
            match (in_a, in_b) {
                (true, true) => {
                    both += n_ab;
                    either += n_a + n_b - n_ab;
                }
                (true, false) => either += n_a,
                (false, true) => either += n_b,
                (false, false) => {}
            }
        }
    }
    if either == 0 {
        0.0
    } else {
        both as f64 / either as f64
    }
}

/// Point-by-point version of [`iou_3d_oracle`]; `O(resolution³)`.
pub fn iou_3d_oracle_pointwise(a: &Box3D, b: &Box3D, resolution: usize) -> f64 {
    let n = resolution.max(MIN_ORACLE_RESOLUTION);
    let (lo, hi) = union_aabb(a, b);
    let (mut both, mut either) = (0u64, 0u64);
    for i in 0..n {
        let x = sample(lo.x, hi.x, n, i);
        for j in 0..n {
            let z = sample(lo.z, hi.z, n, j);
            for k in 0..n {
                let p = Point3::new(x, sample(lo.y, hi.y, n, k), z);
                let (in_a, in_b) = (a.contains(&p), b.contains(&p));
                both += (in_a && in_b) as u64;
                either += (in_a || in_b) as u64;
            }
        }
    }
    if either == 0 {
        0.0
    } else {
        both as f64 / either as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Dimensions;

    #[test]
    fn identical_is_one() {
        let a = Box3D::new(Point3::new(0.0, 1.0, 10.0), Dimensions::new(1.5, 1.6, 3.9), 0.3);
        for res in [32, 50, 128] {
            assert_eq!(iou_3d_oracle(&a, &a, res), 1.0);
        }
    }

    #[test]
    fn half_size_case() {
        let gt = Box3D::new(Point3::new(0.0, 1.6, 12.0), Dimensions::new(2.0, 2.0, 4.0), 0.0);
        let pred = Box3D::new(gt.location, Dimensions::new(1.0, 1.0, 2.0), 0.0);
        let v = iou_3d_oracle(&pred, &gt, 128);
        assert!((v - 0.125).abs() <= 0.01, "{v}");
    }

    #[test]
    fn disjoint_is_zero() {
        let a = Box3D::new(Point3::new(0.0, 1.0, 10.0), Dimensions::new(1.5, 1.6, 3.9), 0.3);
        let b = Box3D::new(Point3::new(8.0, 1.0, 10.0), Dimensions::new(1.5, 1.6, 3.9), 1.3);
        assert_eq!(iou_3d_oracle(&a, &b, 64), 0.0);
    }

    #[test]
    fn column_counting_matches_pointwise() {
        let a = Box3D::new(Point3::new(0.0, 1.0, 10.0), Dimensions::new(1.5, 1.6, 3.9), 0.3);
        let b = Box3D::new(Point3::new(0.7, 0.6, 10.5), Dimensions::new(1.2, 2.0, 3.0), 1.1);
        for res in [32, 40] {
            assert_eq!(iou_3d_oracle(&a, &b, res), iou_3d_oracle_pointwise(&a, &b, res));
        }
    }
}
