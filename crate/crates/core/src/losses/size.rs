//! Size regression losses.
//!
//! For two boxes that agree in everything but size, the 3D IoU is
//! `Π min(sᵢ, s*ᵢ) / (V + V* − Π min(sᵢ, s*ᵢ))`. Near `s = s*` its partial
//! derivatives stand in the ratio `1/h : 1/w : 1/l`, so an L1 loss on the
//! relative error `|sᵢ − s*ᵢ| / sᵢ` weights each side the way IoU does.

use super::LossError;
use crate::geometry::{iou_3d_axis_aligned, Dimensions};

pub type SizeTriple = Dimensions;

/// Sizes at or below this are rejected by the relative losses.
pub const SIZE_EPSILON: f64 = 1e-6;

fn subgradient_sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn check_sizes(s: &SizeTriple, s_star: &SizeTriple) -> Result<(), LossError> {
    for v in s.as_array().into_iter().chain(s_star.as_array()) {
        if !(v > SIZE_EPSILON) {
            return Err(LossError::DegenerateSize { value: v });
        }
    }
    Ok(())
}

/// `‖s − s*‖₁`.
pub fn size_loss_l1(s: &SizeTriple, s_star: &SizeTriple) -> f64 {
    s.as_array()
        .iter()
        .zip(s_star.as_array())
        .map(|(a, b)| (a - b).abs())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeLoss {
    pub value: f64,
    /// Derivative with the `1/s` denominator held constant:
    /// `sign(sᵢ − s*ᵢ) / sᵢ`.
    pub gradient: [f64; 3],
    /// Derivative of the value as written, denominator included:
    /// `sign(sᵢ − s*ᵢ) · s*ᵢ / sᵢ²`.
    pub full_gradient: [f64; 3],
}

/// `‖(s − s*) / s‖₁` with elementwise division.
pub fn size_loss_iou(s: &SizeTriple, s_star: &SizeTriple) -> Result<SizeLoss, LossError> {
    check_sizes(s, s_star)?;
    let (s, t) = (s.as_array(), s_star.as_array());
    let mut value = 0.0;
    let mut gradient = [0.0; 3];
    let mut full_gradient = [0.0; 3];
    for i in 0..3 {
        let diff = s[i] - t[i];
        let sign = subgradient_sign(diff);
        value += diff.abs() / s[i];
        gradient[i] = sign / s[i];
        full_gradient[i] = sign * t[i] / (s[i] * s[i]);
    }
    Ok(SizeLoss {
        value,
        gradient,
        full_gradient,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensatedSizeLoss {
    /// `w_s · L_size`; equal to the plain L1 loss up to rounding.
    pub value: f64,
    /// `w_s = |L1 / L_size|`, treated as a constant.
    pub weight: f64,
    /// `w_s · sign(sᵢ − s*ᵢ) / sᵢ`.
    pub gradient: [f64; 3],
}

/// Relative size loss rescaled per sample so that its magnitude matches the
/// plain L1 loss while its gradient keeps the `1/h : 1/w : 1/l` weighting.
///
/// When `s == s*` both losses vanish; the weight is then defined as 1.
pub fn size_loss_compensated(
    s: &SizeTriple,
    s_star: &SizeTriple,
) -> Result<CompensatedSizeLoss, LossError> {
    let relative = size_loss_iou(s, s_star)?;
    let l1 = size_loss_l1(s, s_star);
    let weight = if relative.value == 0.0 {
        1.0
    } else {
        (l1 / relative.value).abs()
    };
    Ok(CompensatedSizeLoss {
        value: weight * relative.value,
        weight,
        gradient: relative.gradient.map(|g| weight * g),
    })
}

/// Which predicted sides exceed their ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeRegime {
    /// Every side at or below ground truth.
    AllUnder,
    /// Every side above ground truth.
    AllOver,
    /// Exactly one side (the index, h = 0, w = 1, l = 2) above ground truth.
    OneOver(usize),
    /// Exactly two sides above ground truth; the index is the one below.
    TwoOver(usize),
}

impl SizeRegime {
    pub fn classify(s: &SizeTriple, s_star: &SizeTriple) -> Self {
        let over: Vec<bool> = s
            .as_array()
            .iter()
            .zip(s_star.as_array())
            .map(|(a, b)| *a > b)
            .collect();
        match over.iter().filter(|o| **o).count() {
            0 => SizeRegime::AllUnder,
            3 => SizeRegime::AllOver,
            1 => SizeRegime::OneOver(over.iter().position(|o| *o).unwrap()),
            _ => SizeRegime::TwoOver(over.iter().position(|o| !*o).unwrap()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IouPartials {
    pub iou: f64,
    /// `(∂IoU/∂h, ∂IoU/∂w, ∂IoU/∂l)`.
    pub partials: [f64; 3],
    pub regime: SizeRegime,
    /// Sides where `sᵢ == s*ᵢ`; the derivative there is the left-hand one.
    pub one_sided: [bool; 3],
}

impl IouPartials {
    pub fn has_one_sided(&self) -> bool {
        self.one_sided.iter().any(|f| *f)
    }

    /// Partials divided by the largest magnitude, for comparing ratios.
    pub fn normalized_magnitudes(&self) -> [f64; 3] {
        let m = self.partials.iter().fold(0.0f64, |acc, p| acc.max(p.abs()));
        if m == 0.0 {
            return [0.0; 3];
        }
        self.partials.map(|p| p.abs() / m)
    }
}

/// Analytic partial derivatives of [`iou_3d_axis_aligned`] with respect to
/// the predicted size.
///
/// With `I = Π min(sᵢ, s*ᵢ)`, `V = Π sᵢ` and `U = V + V* − I`:
/// `∂IoU/∂sᵢ = (∂I/∂sᵢ · (V + V*) − I · V / sᵢ) / U²`, where
/// `∂I/∂sᵢ = I / sᵢ` if `sᵢ ≤ s*ᵢ` and 0 otherwise.
pub fn iou_partial_ratio(s: &SizeTriple, s_star: &SizeTriple) -> IouPartials {
    let (sv, tv) = (s.as_array(), s_star.as_array());
    let inter: f64 = (0..3).map(|i| sv[i].min(tv[i])).product();
    let vol = s.volume();
    let vol_star = s_star.volume();
    let union = vol + vol_star - inter;
    let mut partials = [0.0; 3];
    let mut one_sided = [false; 3];
    for i in 0..3 {
        let d_inter = if sv[i] <= tv[i] { inter / sv[i] } else { 0.0 };
        partials[i] = (d_inter * (vol + vol_star) - inter * vol / sv[i]) / (union * union);
        one_sided[i] = sv[i] == tv[i];
    }
    IouPartials {
        iou: iou_3d_axis_aligned(s, s_star),
        partials,
        regime: SizeRegime::classify(s, s_star),
        one_sided,
    }
}
