use nalgebra::{Matrix3, Point2, Point3, Vector3};

use super::{Box3D, GeometryError, ReferencePoint};
use crate::kitti_io::Calibration;

/// Image-plane projection of a box's reference point (the `c^w` of a
/// center-based detector).
pub type ProjectedCenter = Point2<f64>;

/// Perspective projection of a camera-frame point through the full 3×4 `P`.
pub fn project(point: &Point3<f64>, calib: &Calibration) -> Result<Point2<f64>, GeometryError> {
    if !(point.z > 0.0) {
        return Err(GeometryError::BehindCamera { z: point.z });
    }
    let p = calib.projection();
    let h = p * point.to_homogeneous();
    if !(h.z > 0.0) {
        return Err(GeometryError::BehindCamera { z: point.z });
    }
    Ok(Point2::new(h.x / h.z, h.y / h.z))
}

/// Recovers the camera-frame point that projects to `pixel` at depth `depth`.
///
/// Solves `P · [x, y, depth, 1]ᵀ = s · [u, v, 1]ᵀ` for `(x, y, s)`, so the
/// translation column of `P` is honored and the returned z equals `depth`
/// exactly. With a translation-free `P` this reduces to
/// `x = depth · (u − cu) / fu`, `y = depth · (v − cv) / fv`.
pub fn back_project(
    pixel: &Point2<f64>,
    depth: f64,
    calib: &Calibration,
) -> Result<Point3<f64>, GeometryError> {
    if !(depth > 0.0) {
        return Err(GeometryError::BehindCamera { z: depth });
    }
    let p = calib.projection();
    let (u, v) = (pixel.x, pixel.y);
    let system = Matrix3::new(
        p[(0, 0)], p[(0, 1)], -u,
        p[(1, 0)], p[(1, 1)], -v,
        p[(2, 0)], p[(2, 1)], -1.0,
    );
    let rhs = Vector3::new(
        -(p[(0, 2)] * depth + p[(0, 3)]),
        -(p[(1, 2)] * depth + p[(1, 3)]),
        -(p[(2, 2)] * depth + p[(2, 3)]),
    );
    let det = system.determinant();
    if !det.is_finite() || det.abs() < 1e-12 {
        return Err(GeometryError::SingularIntrinsics);
    }
    let solution = system
        .lu()
        .solve(&rhs)
        .ok_or(GeometryError::SingularIntrinsics)?;
    Ok(Point3::new(solution.x, solution.y, depth))
}

/// Projection of the box's chosen reference point.
pub fn projected_center(
    b: &Box3D,
    calib: &Calibration,
    reference: ReferencePoint,
) -> Result<ProjectedCenter, GeometryError> {
    project(&b.reference_point(reference), calib)
}
