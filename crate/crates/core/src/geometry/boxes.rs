use nalgebra::{Point2, Point3};
use serde::{Deserialize, Serialize};

use super::polygon::BevPolygon;

/// Axis-aligned image rectangle in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box2D {
    pub left: f64,
    pub top: f64,
    pub right: f64,
    pub bottom: f64,
}

impl Box2D {
    pub fn new(left: f64, top: f64, right: f64, bottom: f64) -> Self {
        Self {
            left,
            top,
            right,
            bottom,
        }
    }

    pub fn width(&self) -> f64 {
        (self.right - self.left).max(0.0)
    }

    pub fn height(&self) -> f64 {
        (self.bottom - self.top).max(0.0)
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point2<f64> {
        Point2::new(
            0.5 * (self.left + self.right),
            0.5 * (self.top + self.bottom),
        )
    }

    /// Area of the overlap rectangle, zero when disjoint.
    pub fn intersection_area(&self, other: &Box2D) -> f64 {
        let iw = self.right.min(other.right) - self.left.max(other.left);
        let ih = self.bottom.min(other.bottom) - self.top.max(other.top);
        if iw <= 0.0 || ih <= 0.0 {
            0.0
        } else {
            iw * ih
        }
    }
}

/// Object size in meters, KITTI order (height, width, length).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dimensions {
    pub h: f64,
    pub w: f64,
    pub l: f64,
}

impl Dimensions {
    pub const fn new(h: f64, w: f64, l: f64) -> Self {
        Self { h, w, l }
    }

    pub fn volume(&self) -> f64 {
        self.h * self.w * self.l
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.h, self.w, self.l]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn is_positive(&self) -> bool {
        self.h > 0.0 && self.w > 0.0 && self.l > 0.0
    }
}

/// Where on a 3D box the "center" is taken.
///
/// KITTI stores the bottom-face center; the projected center drawn by most
/// monocular detectors is the volumetric one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferencePoint {
    BottomCenter,
    #[default]
    VolumetricCenter,
}

/// Yaw-only oriented box in the camera frame (x right, y down, z forward).
///
/// `location` is the center of the bottom face, so the box occupies
/// `[y - h, y]` vertically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box3D {
    pub location: Point3<f64>,
    pub dims: Dimensions,
    pub yaw: f64,
}

impl Box3D {
    pub fn new(location: Point3<f64>, dims: Dimensions, yaw: f64) -> Self {
        Self {
            location,
            dims,
            yaw,
        }
    }

    pub fn y_min(&self) -> f64 {
        self.location.y - self.dims.h
    }

    pub fn y_max(&self) -> f64 {
        self.location.y
    }

    pub fn volume(&self) -> f64 {
        self.dims.volume()
    }

    pub fn reference_point(&self, reference: ReferencePoint) -> Point3<f64> {
        match reference {
            ReferencePoint::BottomCenter => self.location,
            ReferencePoint::VolumetricCenter => Point3::new(
                self.location.x,
                self.location.y - 0.5 * self.dims.h,
                self.location.z,
            ),
        }
    }

    /// Inverse of [`Box3D::reference_point`]: bottom-center location for a
    /// box of height `h` whose reference point is `point`.
    pub fn location_from_reference(
        point: Point3<f64>,
        h: f64,
        reference: ReferencePoint,
    ) -> Point3<f64> {
        match reference {
            ReferencePoint::BottomCenter => point,
            ReferencePoint::VolumetricCenter => Point3::new(point.x, point.y + 0.5 * h, point.z),
        }
    }

    /// Maps an object-frame offset `(dx, dz)` on the ground plane into the
    /// camera frame (rotation about +y by `yaw`, then translation).
    fn rotate_ground(&self, dx: f64, dz: f64) -> (f64, f64) {
        let (s, c) = self.yaw.sin_cos();
        (
            self.location.x + c * dx + s * dz,
            self.location.z - s * dx + c * dz,
        )
    }

    /// The eight corners.
    ///
    /// Order: bottom face first (`y = location.y`), then the top face
    /// (`y = location.y - h`). Within each face the object-frame offsets are
    /// `(+l/2, +w/2), (+l/2, -w/2), (-l/2, -w/2), (-l/2, +w/2)` in `(x, z)`.
    pub fn corners(&self) -> [Point3<f64>; 8] {
        let Dimensions { h, w, l } = self.dims;
        let offsets = [
            (0.5 * l, 0.5 * w),
            (0.5 * l, -0.5 * w),
            (-0.5 * l, -0.5 * w),
            (-0.5 * l, 0.5 * w),
        ];
        let mut out = [Point3::origin(); 8];
        for (i, &(dx, dz)) in offsets.iter().enumerate() {
            let (x, z) = self.rotate_ground(dx, dz);
            out[i] = Point3::new(x, self.location.y, z);
            out[i + 4] = Point3::new(x, self.location.y - h, z);
        }
        out
    }

    /// Footprint on the x-z plane, counter-clockwise.
    pub fn bev_polygon(&self) -> BevPolygon {
        let l = 0.5 * self.dims.l;
        let w = 0.5 * self.dims.w;
        // Counter-clockwise in (x, z) before rotation; a rotation keeps it so.
        let offsets = [(l, w), (-l, w), (-l, -w), (l, -w)];
        let vertices = offsets.map(|(dx, dz)| {
            let (x, z) = self.rotate_ground(dx, dz);
            Point2::new(x, z)
        });
        BevPolygon::new(vertices)
    }

    /// Whether a camera-frame point lies inside the box (boundary included).
    pub fn contains(&self, p: &Point3<f64>) -> bool {
        if p.y < self.y_min() || p.y > self.y_max() {
            return false;
        }
        let dx = p.x - self.location.x;
        let dz = p.z - self.location.z;
        let (s, c) = self.yaw.sin_cos();
        let local_x = c * dx - s * dz;
        let local_z = s * dx + c * dz;
        local_x.abs() <= 0.5 * self.dims.l && local_z.abs() <= 0.5 * self.dims.w
    }

    /// Axis-aligned bounding volume `(min, max)`.
    pub fn aabb(&self) -> (Point3<f64>, Point3<f64>) {
        let corners = self.corners();
        let mut lo = corners[0];
        let mut hi = corners[0];
        for c in &corners[1..] {
            lo = lo.inf(c);
            hi = hi.sup(c);
        }
        (lo, hi)
    }
}
