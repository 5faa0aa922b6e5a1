use std::fmt::{self, Write as _};
use std::str::FromStr;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use super::ParseError;
use crate::losses::normalize_angle;
use crate::geometry::{Box2D, Box3D, Dimensions};

/// Number of columns in a ground-truth row; prediction rows add a score.
pub const LABEL_FIELDS: usize = 15;
pub const PREDICTION_FIELDS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Car,
    Pedestrian,
    Cyclist,
    Van,
    Truck,
    #[serde(rename = "Person_sitting")]
    PersonSitting,
    Tram,
    Misc,
    DontCare,
}

impl Category {
    pub const ALL: [Category; 9] = [
        Category::Car,
        Category::Pedestrian,
        Category::Cyclist,
        Category::Van,
        Category::Truck,
        Category::PersonSitting,
        Category::Tram,
        Category::Misc,
        Category::DontCare,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Car => "Car",
            Category::Pedestrian => "Pedestrian",
            Category::Cyclist => "Cyclist",
            Category::Van => "Van",
            Category::Truck => "Truck",
            Category::PersonSitting => "Person_sitting",
            Category::Tram => "Tram",
            Category::Misc => "Misc",
            Category::DontCare => "DontCare",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown object category `{0}`")]
pub struct UnknownCategory(pub String);

impl FromStr for Category {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| UnknownCategory(s.to_string()))
    }
}

/// One row of a KITTI label or prediction file.
///
/// Prediction files commonly write `-1` for truncation and occlusion; that
/// sentinel is accepted and means "not annotated".
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectLabel {
    pub category: Category,
    pub truncation: f64,
    pub occlusion: i8,
    pub alpha: f64,
    pub box2d: Box2D,
    pub dims: Dimensions,
    /// Bottom-face center, camera frame.
    pub location: Point3<f64>,
    pub rotation_y: f64,
    pub score: Option<f64>,
}

impl ObjectLabel {
    pub fn is_dont_care(&self) -> bool {
        self.category == Category::DontCare
    }

    pub fn box3d(&self) -> Box3D {
        Box3D::new(self.location, self.dims, self.rotation_y)
    }

    pub fn depth(&self) -> f64 {
        self.location.z
    }

    /// Ranking key: the score for predictions, 1.0 for ground truth rows.
    pub fn score_or_one(&self) -> f64 {
        self.score.unwrap_or(1.0)
    }

    /// Checks the row invariants. DontCare rows carry placeholder 3D fields
    /// and are only required to be finite.
    fn validate(&mut self, line: usize) -> Result<(), ParseError> {
        let invalid = |field: usize, reason: &'static str| ParseError::InvalidValue {
            line,
            field,
            reason,
        };
        if self.is_dont_care() {
            return Ok(());
        }
        if !(self.truncation == -1.0 || (0.0..=1.0).contains(&self.truncation)) {
            return Err(invalid(1, "truncation must lie in [0, 1]"));
        }
        if !(-1..=3).contains(&self.occlusion) {
            return Err(invalid(2, "occlusion must be 0, 1, 2 or 3"));
        }
        if self.box2d.right < self.box2d.left {
            return Err(invalid(6, "2D box right edge is left of its left edge"));
        }
        if self.box2d.bottom < self.box2d.top {
            return Err(invalid(7, "2D box bottom edge is above its top edge"));
        }
        for (i, v) in self.dims.as_array().into_iter().enumerate() {
            if !(v > 0.0) {
                return Err(invalid(8 + i, "dimensions must be positive"));
            }
        }
        self.alpha = normalize_angle(self.alpha);
        self.rotation_y = normalize_angle(self.rotation_y);
        Ok(())
    }
}

fn parse_real(token: &str, line: usize, field: usize) -> Result<f64, ParseError> {
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(ParseError::InvalidNumber {
            line,
            field,
            token: token.to_string(),
        }),
    }
}

fn parse_line(text: &str, line: usize) -> Result<ObjectLabel, ParseError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() != LABEL_FIELDS && tokens.len() != PREDICTION_FIELDS {
        return Err(ParseError::FieldCount {
            line,
            found: tokens.len(),
        });
    }
    let category = tokens[0]
        .parse::<Category>()
        .map_err(|e| ParseError::UnknownCategory {
            line,
            token: e.0,
        })?;
    let mut reals = [0.0f64; PREDICTION_FIELDS];
    for (field, token) in tokens.iter().enumerate().skip(1) {
        if field == 2 {
            continue;
        }
        reals[field] = parse_real(token, line, field)?;
    }
    // Occlusion is an integer column, but some writers emit "0.00".
    let occ = parse_real(tokens[2], line, 2)?;
    if occ.fract() != 0.0 || occ.abs() > 127.0 {
        return Err(ParseError::InvalidNumber {
            line,
            field: 2,
            token: tokens[2].to_string(),
        });
    }
    let mut label = ObjectLabel {
        category,
        truncation: reals[1],
        occlusion: occ as i8,
        alpha: reals[3],
        box2d: Box2D::new(reals[4], reals[5], reals[6], reals[7]),
        dims: Dimensions::new(reals[8], reals[9], reals[10]),
        location: Point3::new(reals[11], reals[12], reals[13]),
        rotation_y: reals[14],
        score: (tokens.len() == PREDICTION_FIELDS).then_some(reals[15]),
    };
    label.validate(line)?;
    Ok(label)
}

/// Parses a KITTI label or prediction file, one object per non-blank line.
///
/// Line numbers in errors are 1-based; field indices are 0-based column
/// positions (0 = type, 15 = score).
pub fn parse_label_file(bytes: &[u8]) -> Result<Vec<ObjectLabel>, ParseError> {
    let mut out = Vec::new();
    for (idx, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let line = idx + 1;
        let text = std::str::from_utf8(raw).map_err(|_| ParseError::InvalidUtf8 { line })?;
        if text.trim().is_empty() {
            continue;
        }
        out.push(parse_line(text, line)?);
    }
    Ok(out)
}

/// Serializes objects in KITTI layout with two decimals for every real.
pub fn write_label_file(objects: &[ObjectLabel]) -> String {
    let mut out = String::new();
    for o in objects {
        let _ = write!(
            out,
            "{} {:.2} {} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2}",
            o.category,
            o.truncation,
            o.occlusion,
            o.alpha,
            o.box2d.left,
            o.box2d.top,
            o.box2d.right,
            o.box2d.bottom,
            o.dims.h,
            o.dims.w,
            o.dims.l,
            o.location.x,
            o.location.y,
            o.location.z,
            o.rotation_y,
        );
        if let Some(score) = o.score {
            let _ = write!(out, " {score:.2}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAR: &str =
        "Car 0.00 0 -1.58 587.01 173.33 614.12 200.12 1.65 1.67 3.64 -0.65 1.71 46.70 -1.59";

    #[test]
    fn parses_kitti_row() {
        let labels = parse_label_file(CAR.as_bytes()).unwrap();
        assert_eq!(labels.len(), 1);
        let car = &labels[0];
        assert_eq!(car.category, Category::Car);
        assert_eq!(car.location.z, 46.70);
        assert_eq!(car.dims, Dimensions::new(1.65, 1.67, 3.64));
        assert_eq!(car.box2d.bottom, 200.12);
        assert_eq!(car.score, None);
    }

    #[test]
    fn empty_input() {
        assert!(parse_label_file(b"").unwrap().is_empty());
        assert!(parse_label_file(b"\n  \n").unwrap().is_empty());
        assert_eq!(write_label_file(&[]), "");
    }

    #[test]
    fn score_column() {
        let line = format!("{CAR} 0.91");
        let labels = parse_label_file(line.as_bytes()).unwrap();
        assert_eq!(labels[0].score, Some(0.91));
        let written = write_label_file(&labels);
        assert_eq!(written.split_whitespace().count(), 16);
    }

    #[test]
    fn round_trip_reproduces_row() {
        let labels = parse_label_file(CAR.as_bytes()).unwrap();
        assert_eq!(write_label_file(&labels), format!("{CAR}\n"));
    }

    #[test]
    fn dont_care_kept() {
        let text = "DontCare -1.00 -1 -10.00 503.89 169.71 590.61 190.13 -1.00 -1.00 -1.00 -1000.00 -1000.00 -1000.00 -10.00\n";
        let labels = parse_label_file(text.as_bytes()).unwrap();
        assert!(labels[0].is_dont_care());
        assert_eq!(labels[0].alpha, -10.0);
        assert_eq!(write_label_file(&labels), text);
    }

    #[test]
    fn field_count_errors() {
        let err = parse_label_file(b"Car 0 0 1.0").unwrap_err();
        assert_eq!(err, ParseError::FieldCount { line: 1, found: 4 });
        let long = format!("{CAR} 0.5 0.5");
        assert!(matches!(
            parse_label_file(long.as_bytes()),
            Err(ParseError::FieldCount { found: 17, .. })
        ));
    }

    #[test]
    fn malformed_number_reports_position() {
        let text = format!("{CAR}\nCar 0.00 0 -1.58 587.01 abc 614.12 200.12 1.65 1.67 3.64 -0.65 1.71 46.70 -1.59");
        match parse_label_file(text.as_bytes()) {
            Err(ParseError::InvalidNumber { line, field, token }) => {
                assert_eq!((line, field, token.as_str()), (2, 5, "abc"));
            }
            other => panic!("{other:?}"),
        }
        let nan = CAR.replace("46.70", "NaN");
        assert!(matches!(
            parse_label_file(nan.as_bytes()),
            Err(ParseError::InvalidNumber { field: 13, .. })
        ));
    }

    #[test]
    fn invariant_violations() {
        let bad_dims = CAR.replace("1.65 1.67", "0.00 1.67");
        assert!(matches!(
            parse_label_file(bad_dims.as_bytes()),
            Err(ParseError::InvalidValue { field: 8, .. })
        ));
        let bad_box = CAR.replace("587.01 173.33 614.12", "620.00 173.33 614.12");
        assert!(matches!(
            parse_label_file(bad_box.as_bytes()),
            Err(ParseError::InvalidValue { field: 6, .. })
        ));
        let bad_occ = CAR.replace("Car 0.00 0", "Car 0.00 4");
        assert!(matches!(
            parse_label_file(bad_occ.as_bytes()),
            Err(ParseError::InvalidValue { field: 2, .. })
        ));
        let unknown = CAR.replace("Car", "Bus");
        assert!(matches!(
            parse_label_file(unknown.as_bytes()),
            Err(ParseError::UnknownCategory { .. })
        ));
    }

    #[test]
    fn angles_are_wrapped() {
        let text = CAR.replace("-1.59", "4.00");
        let labels = parse_label_file(text.as_bytes()).unwrap();
        assert!((labels[0].rotation_y - (4.0 - 2.0 * std::f64::consts::PI)).abs() < 1e-12);
    }

    #[test]
    fn prediction_sentinels_accepted() {
        let text = CAR.replace("Car 0.00 0", "Car -1 -1") + " 0.5";
        let labels = parse_label_file(text.as_bytes()).unwrap();
        assert_eq!(labels[0].occlusion, -1);
        assert_eq!(labels[0].truncation, -1.0);
    }

    #[test]
    fn windows_line_endings() {
        let text = format!("{CAR}\r\n{CAR}\r\n");
        assert_eq!(parse_label_file(text.as_bytes()).unwrap().len(), 2);
    }
}
