//! Box geometry: projection and back-projection through a KITTI camera,
//! box corners, and 2D / bird's-eye-view / 3D IoU.
//!
//! Boxes follow the KITTI camera frame: x right, y down, z forward, the
//! location is the center of the bottom face and yaw rotates about +y.

mod boxes;
mod iou;
mod oracle;
mod polygon;
mod projection;

pub use boxes::{Box2D, Box3D, Dimensions, ReferencePoint};
pub use iou::{
    bev_intersection_area, intersection_over_first, iou_2d, iou_3d, iou_3d_axis_aligned, iou_bev,
    vertical_overlap,
};
pub use oracle::{iou_3d_oracle, iou_3d_oracle_pointwise, MIN_ORACLE_RESOLUTION};
pub use polygon::{clip_convex, shoelace_area, BevPolygon, CLIP_EPSILON};
pub use projection::{back_project, project, projected_center, ProjectedCenter};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("point at z = {z} is not in front of the camera")]
    BehindCamera { z: f64 },
    #[error("projection matrix cannot be inverted for back-projection")]
    SingularIntrinsics,
}
