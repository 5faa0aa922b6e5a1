use serde::{Deserialize, Serialize};

use super::LossError;

/// Depth-dependent per-object training weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum SampleWeightParams {
    /// Weight 1 up to `threshold` meters, 0 beyond.
    Hard { threshold: f64 },
    /// `1 / (1 + exp((d − center) / temperature))`.
    Soft { center: f64, temperature: f64 },
}

impl Default for SampleWeightParams {
    fn default() -> Self {
        SampleWeightParams::Soft {
            center: 60.0,
            temperature: 1.0,
        }
    }
}

impl SampleWeightParams {
    pub fn validate(&self) -> Result<(), LossError> {
        match *self {
            SampleWeightParams::Hard { threshold } if !(threshold > 0.0) => {
                Err(LossError::InvalidWeightParams("hard threshold must be positive"))
            }
            SampleWeightParams::Soft { temperature, .. } if !(temperature > 0.0) => {
                Err(LossError::InvalidWeightParams("soft temperature must be positive"))
            }
            SampleWeightParams::Soft { center, .. } if !center.is_finite() => {
                Err(LossError::InvalidWeightParams("soft center must be finite"))
            }
            _ => Ok(()),
        }
    }
}

pub fn sample_weight(depth: f64, params: &SampleWeightParams) -> f64 {
    match *params {
        SampleWeightParams::Hard { threshold } => {
            if depth <= threshold {
                1.0
            } else {
                0.0
            }
        }
        SampleWeightParams::Soft {
            center,
            temperature,
        } => 1.0 / (1.0 + ((depth - center) / temperature).exp()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hard_threshold() {
        let p = SampleWeightParams::Hard { threshold: 60.0 };
        assert_eq!(sample_weight(59.0, &p), 1.0);
        assert_eq!(sample_weight(60.0, &p), 1.0);
        assert_eq!(sample_weight(61.0, &p), 0.0);
    }

    #[test]
    fn soft_midpoint_and_monotone() {
        let p = SampleWeightParams::default();
        assert_eq!(sample_weight(60.0, &p), 0.5);
        let mut prev = 1.0;
        for i in 0..=60 {
            let w = sample_weight(30.0 + i as f64, &p);
            assert!(w < prev && w > 0.0);
            prev = w;
        }
    }

    #[test]
    fn soft_saturates_without_nan() {
        let p = SampleWeightParams::Soft {
            center: 60.0,
            temperature: 1e-4,
        };
        assert_eq!(sample_weight(1000.0, &p), 0.0);
        assert_eq!(sample_weight(0.0, &p), 1.0);
    }

    #[test]
    fn validation() {
        assert!(SampleWeightParams::Hard { threshold: 0.0 }.validate().is_err());
        assert!(SampleWeightParams::Soft {
            center: 60.0,
            temperature: 0.0
        }
        .validate()
        .is_err());
        assert!(SampleWeightParams::default().validate().is_ok());
    }

    #[test]
    fn toml_like_round_trip() {
        let json = serde_json::to_string(&SampleWeightParams::Hard { threshold: 60.0 }).unwrap();
        assert_eq!(json, r#"{"scheme":"hard","threshold":60.0}"#);
    }
}
