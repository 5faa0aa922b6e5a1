use std::f64::consts::{PI, TAU};

/// Wraps an angle into `[-π, π]`. Values already in range are returned
/// unchanged, so `π` stays `π`.
pub fn normalize_angle(theta: f64) -> f64 {
    if (-PI..=PI).contains(&theta) || !theta.is_finite() {
        return theta;
    }
    let wrapped = (theta + PI).rem_euclid(TAU) - PI;
    if wrapped < -PI {
        wrapped + TAU
    } else {
        wrapped
    }
}

/// Global yaw from the observation angle: `rotation_y = alpha + atan2(x, z)`.
pub fn alpha_to_rotation_y(alpha: f64, x: f64, z: f64) -> f64 {
    normalize_angle(alpha + x.atan2(z))
}

/// Observation angle from the global yaw: `alpha = rotation_y - atan2(x, z)`.
pub fn rotation_y_to_alpha(rotation_y: f64, x: f64, z: f64) -> f64 {
    normalize_angle(rotation_y - x.atan2(z))
}

/// Distance between two angles on the circle, in `[0, π]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    normalize_angle(a - b).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn centered_object_has_equal_angles() {
        assert_eq!(alpha_to_rotation_y(0.7, 0.0, 20.0), 0.7);
    }

    #[test]
    fn diagonal_ray() {
        assert!((alpha_to_rotation_y(0.2, 5.0, 5.0) - (0.2 + FRAC_PI_4)).abs() < 1e-15);
    }

    #[test]
    fn round_trip_mod_two_pi() {
        for &(alpha, x, z) in &[(3.0, 10.0, 4.0), (-3.1, -8.0, 5.0), (0.0, 1.0, 30.0)] {
            let ry = alpha_to_rotation_y(alpha, x, z);
            assert!((-PI..=PI).contains(&ry));
            let back = rotation_y_to_alpha(ry, x, z);
            assert!(angular_distance(back, alpha) < 1e-12);
        }
    }

    #[test]
    fn normalize_wraps() {
        assert_eq!(normalize_angle(PI), PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((normalize_angle(-7.0) - (-7.0 + TAU)).abs() < 1e-15);
        assert!((angular_distance(3.1, -3.1) - (TAU - 6.2)).abs() < 1e-12);
    }
}
