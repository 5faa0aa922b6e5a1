//! Multi-bin heading: the circle is cut into twelve equal, non-overlapping
//! bins; the network classifies the bin and regresses the offset from its
//! center.

use std::f64::consts::TAU;

use super::LossError;
use crate::kitti_io::HEADING_BINS;

pub const BIN_WIDTH: f64 = TAU / HEADING_BINS as f64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadingEncoding {
    pub bin: usize,
    /// Offset from the bin center, in `[-BIN_WIDTH/2, BIN_WIDTH/2)`.
    pub residual: f64,
}

pub fn bin_center(bin: usize) -> f64 {
    (bin as f64 + 0.5) * BIN_WIDTH
}

pub fn heading_encode(theta: f64) -> HeadingEncoding {
    let mut t = theta.rem_euclid(TAU);
    if t >= TAU {
        t = 0.0;
    }
    let bin = ((t / BIN_WIDTH).floor() as usize).min(HEADING_BINS - 1);
    HeadingEncoding {
        bin,
        residual: t - bin_center(bin),
    }
}

/// Angle in `[0, 2π)` up to rounding.
pub fn heading_decode(encoding: &HeadingEncoding) -> f64 {
    bin_center(encoding.bin) + encoding.residual
}

/// Decodes raw head outputs: the arg-max bin plus the regressed residual.
pub fn heading_from_logits(logits: &[f64; HEADING_BINS], residual: f64) -> f64 {
    let bin = logits
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > logits[best] { i } else { best });
    heading_decode(&HeadingEncoding { bin, residual })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadingLoss {
    pub value: f64,
    pub classification: f64,
    pub regression: f64,
    pub grad_logits: [f64; HEADING_BINS],
    pub grad_residual: f64,
}

/// Softmax cross-entropy on the ground-truth bin plus the L1 error of the
/// predicted residual against that bin's residual.
pub fn heading_loss(logits: &[f64], residual_pred: f64, theta_star: f64) -> Result<HeadingLoss, LossError> {
    if logits.len() != HEADING_BINS {
        return Err(LossError::WrongLogitCount {
            found: logits.len(),
        });
    }
    let target = heading_encode(theta_star);
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum_exp: f64 = logits.iter().map(|v| (v - max).exp()).sum();
    let log_norm = max + sum_exp.ln();
    let classification = (log_norm - logits[target.bin]).max(0.0);

    let mut grad_logits = [0.0; HEADING_BINS];
    for (g, v) in grad_logits.iter_mut().zip(logits) {
        *g = (v - log_norm).exp();
    }
    grad_logits[target.bin] -= 1.0;

    let diff = residual_pred - target.residual;
    let regression = diff.abs();
    let grad_residual = if diff > 0.0 {
        1.0
    } else if diff < 0.0 {
        -1.0
    } else {
        0.0
    };
    Ok(HeadingLoss {
        value: classification + regression,
        classification,
        regression,
        grad_logits,
        grad_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn bin_zero_center() {
        let e = heading_encode(PI / 12.0);
        assert_eq!(e.bin, 0);
        assert!(e.residual.abs() < 1e-15);
    }

    #[test]
    fn zero_is_left_edge_of_first_bin() {
        let e = heading_encode(0.0);
        assert_eq!(e.bin, 0);
        assert!((e.residual + PI / 12.0).abs() < 1e-15);
    }

    #[test]
    fn negative_and_large_angles() {
        let e = heading_encode(-PI / 2.0);
        assert_eq!(e.bin, 9);
        assert!((heading_decode(&e) - 1.5 * PI).abs() < 1e-12);
        let e = heading_encode(-1e-300);
        assert!(e.bin < HEADING_BINS);
        assert!(e.residual >= -BIN_WIDTH / 2.0 && e.residual < BIN_WIDTH / 2.0 + 1e-15);
    }

    #[test]
    fn bins_partition_circle() {
        let mut counts = [0usize; HEADING_BINS];
        let n = 12_000;
        for i in 0..n {
            let e = heading_encode((i as f64 + 0.5) * TAU / n as f64);
            counts[e.bin] += 1;
        }
        assert!(counts.iter().all(|c| *c == n / HEADING_BINS));
    }

    #[test]
    fn confident_and_exact_is_zero() {
        let theta = 2.0;
        let target = heading_encode(theta);
        let mut logits = [0.0; 12];
        logits[target.bin] = 1000.0;
        let loss = heading_loss(&logits, target.residual, theta).unwrap();
        assert_eq!(loss.value, 0.0);
    }

    #[test]
    fn uniform_logits_cost_log_twelve() {
        let loss = heading_loss(&[0.3; 12], 0.0, 1.0).unwrap();
        assert!((loss.classification - 12f64.ln()).abs() < 1e-12);
        assert!((12f64.ln() - 2.4849).abs() < 1e-4);
    }

    #[test]
    fn residual_term_adds() {
        let theta = -2.5;
        let target = heading_encode(theta);
        let mut logits = [-50.0; 12];
        logits[target.bin] = 50.0;
        let loss = heading_loss(&logits, target.residual + 0.07, theta).unwrap();
        assert!((loss.value - 0.07).abs() < 1e-12);
        assert_eq!(loss.grad_residual, 1.0);
    }

    #[test]
    fn logit_count() {
        assert!(matches!(heading_loss(&[0.0; 11], 0.0, 0.0), Err(LossError::WrongLogitCount { found: 11 })));
    }

    #[test]
    fn decode_from_logits() {
        let mut logits = [0.0; 12];
        logits[4] = 3.0;
        assert!((heading_from_logits(&logits, 0.01) - (bin_center(4) + 0.01)).abs() < 1e-15);
    }
}
