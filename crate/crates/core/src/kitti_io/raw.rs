use nalgebra::{Point2, Vector2};
use serde::{Deserialize, Serialize};

use super::RawOutputsError;
use crate::geometry::Dimensions;

pub const HEADING_BINS: usize = 12;

/// Per-object outputs of a center-based monocular detector before they are
/// decoded into a KITTI row.
///
/// Record `i` of an image's sidecar describes prediction row `i` of the same
/// image's prediction file.
#[derive(Debug, Clone, PartialEq)]
pub struct RawHeadOutputs {
    /// Heatmap peak, pixels.
    pub coarse_center: Point2<f64>,
    /// Offset from the coarse center to the 2D box center.
    pub offset2d: Vector2<f64>,
    /// Offset from the coarse center to the projected 3D center.
    pub offset3d: Vector2<f64>,
    pub depth: f64,
    pub depth_sigma: Option<f64>,
    pub size3d: Dimensions,
    pub heading_bin_logits: [f64; HEADING_BINS],
    pub heading_residual: f64,
    pub score: f64,
}

impl RawHeadOutputs {
    /// Projected 3D center `c + o3d`.
    pub fn projected_center(&self) -> Point2<f64> {
        self.coarse_center + self.offset3d
    }

    /// 2D box center `c + o2d`.
    pub fn box_center(&self) -> Point2<f64> {
        self.coarse_center + self.offset2d
    }
}

#[derive(Debug, Default, Deserialize)]
struct RawRecord {
    coarse_center: Option<[f64; 2]>,
    offset2d: Option<[f64; 2]>,
    offset3d: Option<[f64; 2]>,
    depth: Option<f64>,
    depth_sigma: Option<f64>,
    size3d: Option<[f64; 3]>,
    heading_bin_logits: Option<Vec<f64>>,
    heading_residual: Option<f64>,
    score: Option<f64>,
}

#[derive(Serialize)]
struct RawRecordOut {
    coarse_center: [f64; 2],
    offset2d: [f64; 2],
    offset3d: [f64; 2],
    depth: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    depth_sigma: Option<f64>,
    size3d: [f64; 3],
    heading_bin_logits: [f64; HEADING_BINS],
    heading_residual: f64,
    score: f64,
}

fn require<T>(value: Option<T>, record: usize, key: &'static str) -> Result<T, RawOutputsError> {
    value.ok_or(RawOutputsError::MissingKey { record, key })
}

fn finite(values: &[f64], record: usize, key: &'static str) -> Result<(), RawOutputsError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(RawOutputsError::NonFinite { record, key })
    }
}

impl RawRecord {
    fn into_outputs(self, record: usize) -> Result<RawHeadOutputs, RawOutputsError> {
        let coarse = require(self.coarse_center, record, "coarse_center")?;
        let offset2d = require(self.offset2d, record, "offset2d")?;
        let offset3d = require(self.offset3d, record, "offset3d")?;
        let depth = require(self.depth, record, "depth")?;
        let size = require(self.size3d, record, "size3d")?;
        let logits = require(self.heading_bin_logits, record, "heading_bin_logits")?;
        let residual = require(self.heading_residual, record, "heading_residual")?;
        let score = require(self.score, record, "score")?;

        finite(&coarse, record, "coarse_center")?;
        finite(&offset2d, record, "offset2d")?;
        finite(&offset3d, record, "offset3d")?;
        finite(&size, record, "size3d")?;
        finite(&logits, record, "heading_bin_logits")?;
        finite(&[residual], record, "heading_residual")?;

        if !(depth > 0.0) || !depth.is_finite() {
            return Err(RawOutputsError::InvalidDepth {
                record,
                value: depth,
            });
        }
        if let Some(sigma) = self.depth_sigma {
            if !(sigma > 0.0) || !sigma.is_finite() {
                return Err(RawOutputsError::InvalidSigma {
                    record,
                    value: sigma,
                });
            }
        }
        if !(0.0..=1.0).contains(&score) {
            return Err(RawOutputsError::InvalidScore {
                record,
                value: score,
            });
        }
        let heading_bin_logits: [f64; HEADING_BINS] =
            logits
                .as_slice()
                .try_into()
                .map_err(|_| RawOutputsError::WrongLogitCount {
                    record,
                    found: logits.len(),
                })?;
        Ok(RawHeadOutputs {
            coarse_center: Point2::new(coarse[0], coarse[1]),
            offset2d: Vector2::new(offset2d[0], offset2d[1]),
            offset3d: Vector2::new(offset3d[0], offset3d[1]),
            depth,
            depth_sigma: self.depth_sigma,
            size3d: Dimensions::from_array(size),
            heading_bin_logits,
            heading_residual: residual,
            score,
        })
    }
}

/// Parses one image's sidecar: a JSON array of records. Unknown keys are
/// ignored; record order is preserved.
pub fn parse_raw_outputs(bytes: &[u8]) -> Result<Vec<RawHeadOutputs>, RawOutputsError> {
    let records: Vec<RawRecord> =
        serde_json::from_slice(bytes).map_err(|e| RawOutputsError::Json(e.to_string()))?;
    records
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.into_outputs(i))
        .collect()
}

pub fn write_raw_outputs(outputs: &[RawHeadOutputs]) -> String {
    let records: Vec<RawRecordOut> = outputs
        .iter()
        .map(|o| RawRecordOut {
            coarse_center: [o.coarse_center.x, o.coarse_center.y],
            offset2d: [o.offset2d.x, o.offset2d.y],
            offset3d: [o.offset3d.x, o.offset3d.y],
            depth: o.depth,
            depth_sigma: o.depth_sigma,
            size3d: o.size3d.as_array(),
            heading_bin_logits: o.heading_bin_logits,
            heading_residual: o.heading_residual,
            score: o.score,
        })
        .collect();
    serde_json::to_string_pretty(&records).expect("raw outputs serialize to JSON")
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn record() -> serde_json::Value {
        json!({
            "coarse_center": [100.0, 50.0],
            "offset2d": [0.5, -0.25],
            "offset3d": [1.5, 2.0],
            "depth": 10.0,
            "depth_sigma": 0.4,
            "size3d": [1.5, 1.6, 3.9],
            "heading_bin_logits": vec![0.0; 12],
            "heading_residual": 0.1,
            "score": 0.8
        })
    }

    fn parse(v: serde_json::Value) -> Result<Vec<RawHeadOutputs>, RawOutputsError> {
        parse_raw_outputs(v.to_string().as_bytes())
    }

    #[test]
    fn parses_record() {
        let out = parse(json!([record()])).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].depth, 10.0);
        assert_eq!(out[0].coarse_center, Point2::new(100.0, 50.0));
        assert_eq!(out[0].projected_center(), Point2::new(101.5, 52.0));
        assert_eq!(out[0].box_center(), Point2::new(100.5, 49.75));
        assert_eq!(out[0].depth_sigma, Some(0.4));
    }

    #[test]
    fn optional_sigma_and_unknown_keys() {
        let mut r = record();
        r.as_object_mut().unwrap().remove("depth_sigma");
        r["extra"] = json!("ignored");
        let out = parse(json!([r])).unwrap();
        assert_eq!(out[0].depth_sigma, None);
    }

    #[test]
    fn missing_key_is_named() {
        let mut r = record();
        r.as_object_mut().unwrap().remove("heading_residual");
        assert_eq!(
            parse(json!([record(), r])),
            Err(RawOutputsError::MissingKey {
                record: 1,
                key: "heading_residual"
            })
        );
    }

    #[test]
    fn wrong_logit_count() {
        for n in [11, 13] {
            let mut r = record();
            r["heading_bin_logits"] = json!(vec![0.0; n]);
            assert_eq!(
                parse(json!([r])),
                Err(RawOutputsError::WrongLogitCount { record: 0, found: n })
            );
        }
    }

    #[test]
    fn invalid_depth_and_sigma() {
        let mut r = record();
        r["depth"] = json!(-1.0);
        assert!(matches!(parse(json!([r])), Err(RawOutputsError::InvalidDepth { .. })));
        let mut r = record();
        r["depth_sigma"] = json!(0.0);
        assert!(matches!(parse(json!([r])), Err(RawOutputsError::InvalidSigma { .. })));
    }

    #[test]
    fn not_json() {
        assert!(matches!(parse_raw_outputs(b"{oops"), Err(RawOutputsError::Json(_))));
        assert!(matches!(parse_raw_outputs(b"{}"), Err(RawOutputsError::Json(_))));
    }

    #[test]
    fn write_then_parse() {
        let out = parse(json!([record(), record()])).unwrap();
        assert_eq!(parse_raw_outputs(write_raw_outputs(&out).as_bytes()).unwrap(), out);
    }
}
