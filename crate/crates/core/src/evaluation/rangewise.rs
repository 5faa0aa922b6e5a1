use rayon::prelude::*;
use serde::Serialize;

use super::{ap40, DepthBucket, EvalConfig, EvalError, EvalResult, Frame};

/// Farthest bucket center considered, in meters.
pub const MAX_RANGE: f64 = 90.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketResult {
    pub bucket: DepthBucket,
    pub result: EvalResult,
}

/// Centers `interval, 2·interval, …` up to [`MAX_RANGE`].
pub fn bucket_centers(interval: f64) -> Result<Vec<f64>, EvalError> {
    if !(interval > 0.0 && interval.is_finite()) {
        return Err(EvalError::InvalidInterval(interval));
    }
    let count = (MAX_RANGE / interval + 1e-9).floor() as usize;
    Ok((1..=count).map(|k| k as f64 * interval).collect())
}

/// Evaluates `config` once per depth bucket of width `interval`. Any bucket
/// already present in `config` is replaced.
pub fn rangewise_eval(frames: &[Frame], config: &EvalConfig, interval: f64) -> Result<Vec<BucketResult>, EvalError> {
    let centers = bucket_centers(interval)?;
    centers
        .par_iter()
        .map(|&center| {
            let bucket = DepthBucket {
                center,
                half_width: interval / 2.0,
            };
            let result = ap40(frames, &config.with_bucket(Some(bucket)))?;
            Ok(BucketResult { bucket, result })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_meter_buckets() {
        let c = bucket_centers(10.0).unwrap();
        assert_eq!(c.len(), 9);
        assert_eq!(c[0], 10.0);
        assert_eq!(c[8], 90.0);
    }

    #[test]
    fn twenty_five_is_in_thirty() {
        let b = DepthBucket {
            center: 30.0,
            half_width: 5.0,
        };
        assert!(b.contains(25.0));
        assert!(!b.contains(35.0));
    }

    #[test]
    fn rejects_bad_interval() {
        assert!(bucket_centers(0.0).is_err());
        assert!(bucket_centers(f64::NAN).is_err());
    }
}
