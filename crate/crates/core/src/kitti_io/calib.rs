use nalgebra::Matrix3x4;

use super::CalibError;

/// Tolerance on the last row of `P` for the `K [I | t]` decomposition.
pub const CANONICAL_ROW_TOLERANCE: f64 = 1e-9;

/// KITTI left-color camera projection (`P2`).
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    p: Matrix3x4<f64>,
}

impl Calibration {
    pub fn from_projection(p: Matrix3x4<f64>) -> Result<Self, CalibError> {
        if p.iter().any(|v| !v.is_finite()) {
            return Err(CalibError::NonFinite);
        }
        if !(p[(0, 0)] > 0.0) || !(p[(1, 1)] > 0.0) {
            return Err(CalibError::NonPositiveFocal {
                fu: p[(0, 0)],
                fv: p[(1, 1)],
            });
        }
        Ok(Self { p })
    }

    /// Translation-free camera with the given pinhole intrinsics.
    pub fn from_intrinsics(fu: f64, fv: f64, cu: f64, cv: f64) -> Result<Self, CalibError> {
        #[rustfmt::skip]
        let p = Matrix3x4::new(
            fu, 0.0, cu, 0.0,
            0.0, fv, cv, 0.0,
            0.0, 0.0, 1.0, 0.0,
        );
        Self::from_projection(p)
    }

    pub fn projection(&self) -> &Matrix3x4<f64> {
        &self.p
    }

    pub fn fu(&self) -> f64 {
        self.p[(0, 0)]
    }

    pub fn fv(&self) -> f64 {
        self.p[(1, 1)]
    }

    pub fn cu(&self) -> f64 {
        self.p[(0, 2)]
    }

    pub fn cv(&self) -> f64 {
        self.p[(1, 2)]
    }

    /// Whether the first three entries of the last row are `(0, 0, 1)`,
    /// which the focal/principal-point accessors assume.
    pub fn has_canonical_last_row(&self) -> bool {
        (self.p[(2, 0)]).abs() <= CANONICAL_ROW_TOLERANCE
            && (self.p[(2, 1)]).abs() <= CANONICAL_ROW_TOLERANCE
            && (self.p[(2, 2)] - 1.0).abs() <= CANONICAL_ROW_TOLERANCE
    }
}

/// Parses a KITTI calibration file and returns its `P2` matrix.
///
/// Other keys (`P0`, `R0_rect`, `Tr_velo_to_cam`, ...) are ignored.
pub fn parse_calib_file(bytes: &[u8]) -> Result<Calibration, CalibError> {
    for (idx, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let line = idx + 1;
        let text = std::str::from_utf8(raw).map_err(|_| CalibError::InvalidUtf8 { line })?;
        let mut tokens = text.split_whitespace();
        if tokens.next() != Some("P2:") {
            continue;
        }
        let values: Vec<&str> = tokens.collect();
        if values.len() != 12 {
            return Err(CalibError::WrongValueCount {
                line,
                found: values.len(),
            });
        }
        let mut entries = [0.0f64; 12];
        for (position, token) in values.iter().enumerate() {
            entries[position] = token
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CalibError::InvalidNumber {
                    line,
                    position,
                    token: token.to_string(),
                })?;
        }
        let calib = Calibration::from_projection(Matrix3x4::from_row_slice(&entries))?;
        if !calib.has_canonical_last_row() {
            log::warn!(
                "P2 last row is not (0, 0, 1, t); focal and principal point accessors are approximate"
            );
        }
        return Ok(calib);
    }
    Err(CalibError::MissingP2)
}

#[cfg(test)]
mod tests {
    use super::*;

    const KITTI_CALIB: &str = "\
P0: 7.070493e+02 0.000000e+00 6.040814e+02 0.000000e+00 0.000000e+00 7.070493e+02 1.805066e+02 0.000000e+00 0.000000e+00 0.000000e+00 1.000000e+00 0.000000e+00
P1: 7.070493e+02 0.000000e+00 6.040814e+02 -3.797842e+02 0.000000e+00 7.070493e+02 1.805066e+02 0.000000e+00 0.000000e+00 0.000000e+00 1.000000e+00 0.000000e+00
P2: 7.070493e+02 0.000000e+00 6.040814e+02 4.575831e+01 0.000000e+00 7.070493e+02 1.805066e+02 -3.454157e-01 0.000000e+00 0.000000e+00 1.000000e+00 4.981016e-03
P3: 7.070493e+02 0.000000e+00 6.040814e+02 -3.341081e+02 0.000000e+00 7.070493e+02 1.805066e+02 2.330660e+00 0.000000e+00 0.000000e+00 1.000000e+00 3.201153e-03
R0_rect: 9.999128e-01 1.009263e-02 -8.511932e-03 -1.012729e-02 9.999406e-01 -4.037671e-03 8.470675e-03 4.123522e-03 9.999556e-01
Tr_velo_to_cam: 6.927964e-03 -9.999722e-01 -2.757829e-03 -2.457729e-02 -1.162982e-03 2.749836e-03 -9.999955e-01 -6.127237e-02 9.999753e-01 6.931141e-03 -1.143899e-03 -3.321029e-01
";

    #[test]
    fn parses_p2() {
        let calib = parse_calib_file(KITTI_CALIB.as_bytes()).unwrap();
        assert_eq!(calib.fu(), 707.0493);
        assert_eq!(calib.fv(), 707.0493);
        assert_eq!(calib.cu(), 604.0814);
        assert_eq!(calib.cv(), 180.5066);
        assert_eq!(calib.projection()[(0, 3)], 45.75831);
        assert!(calib.has_canonical_last_row());
    }

    #[test]
    fn intrinsic_only_p2() {
        let text = "P2: 700 0 610.5 0 0 700 172.25 0 0 0 1 0\n";
        let calib = parse_calib_file(text.as_bytes()).unwrap();
        assert_eq!((calib.cu(), calib.cv()), (610.5, 172.25));
    }

    #[test]
    fn missing_p2() {
        let text: String = KITTI_CALIB.lines().take(2).collect::<Vec<_>>().join("\n");
        assert_eq!(parse_calib_file(text.as_bytes()), Err(CalibError::MissingP2));
        assert_eq!(parse_calib_file(b""), Err(CalibError::MissingP2));
    }

    #[test]
    fn bad_token_position() {
        let text = "P2: 700 0 610.5 0 0 x 172.25 0 0 0 1 0\n";
        assert_eq!(
            parse_calib_file(text.as_bytes()),
            Err(CalibError::InvalidNumber {
                line: 1,
                position: 5,
                token: "x".into()
            })
        );
        let short = "P2: 700 0 610.5\n";
        assert!(matches!(
            parse_calib_file(short.as_bytes()),
            Err(CalibError::WrongValueCount { found: 3, .. })
        ));
    }

    #[test]
    fn rejects_non_positive_focal() {
        let text = "P2: -700 0 610.5 0 0 700 172.25 0 0 0 1 0\n";
        assert!(matches!(
            parse_calib_file(text.as_bytes()),
            Err(CalibError::NonPositiveFocal { .. })
        ));
    }

    #[test]
    fn flags_non_canonical_row() {
        let text = "P2: 700 0 610.5 0 0 700 172.25 0 0.1 0 1 0\n";
        let calib = parse_calib_file(text.as_bytes()).unwrap();
        assert!(!calib.has_canonical_last_row());
    }
}
