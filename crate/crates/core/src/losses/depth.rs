//! Uncertainty-aware depth regression: negative log-likelihoods of a
//! Laplace and a Gaussian whose scale the network predicts alongside depth.

use std::f64::consts::SQRT_2;

use super::LossError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthPrediction {
    pub depth: f64,
    /// Predicted standard deviation, meters.
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthLoss {
    pub value: f64,
    pub grad_depth: f64,
    /// Derivative w.r.t. σ (Laplace) or σ² (Gaussian).
    pub grad_scale: f64,
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `√2/σ · |d − d*| + log σ`.
pub fn depth_loss_laplace(p: DepthPrediction, target: f64) -> Result<DepthLoss, LossError> {
    let sigma = p.sigma;
    if !(sigma > 0.0) {
        return Err(LossError::InvalidSigma { value: sigma });
    }
    let residual = p.depth - target;
    let abs = residual.abs();
    Ok(DepthLoss {
        value: SQRT_2 / sigma * abs + sigma.ln(),
        grad_depth: SQRT_2 * sign(residual) / sigma,
        grad_scale: 1.0 / sigma - SQRT_2 * abs / (sigma * sigma),
    })
}

/// `(d − d*)² / (2σ²) + ½ log σ²`, parameterized by the variance.
pub fn depth_loss_gaussian(depth: f64, variance: f64, target: f64) -> Result<DepthLoss, LossError> {
    if !(variance > 0.0) {
        return Err(LossError::InvalidSigma { value: variance });
    }
    let residual = depth - target;
    let sq = residual * residual;
    Ok(DepthLoss {
        value: sq / (2.0 * variance) + 0.5 * variance.ln(),
        grad_depth: residual / variance,
        grad_scale: 0.5 / variance - sq / (2.0 * variance * variance),
    })
}
