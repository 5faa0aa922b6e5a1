//! Finite-difference and identity checks for every loss in this module.
//!
//! Relative error is `|a − n| / max(|a|, |n|, GRADIENT_SCALE_FLOOR)`; the
//! floor only matters for components whose true value is near zero, such as
//! softmax probabilities of far-off bins. Sample domains keep every point at
//! least 1000 steps away from a kink; kinks are exercised by a separate
//! property that checks the one-sided flags and zero subgradients.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    angular_distance, depth_loss_gaussian, depth_loss_laplace, heading_decode, heading_encode,
    heading_loss, iou_partial_ratio, sample_weight, size_loss_compensated, size_loss_iou,
    size_loss_l1, DepthPrediction, LossError, SampleWeightParams, SizeRegime,
};
use crate::geometry::{iou_3d_axis_aligned, Dimensions};

pub const FD_STEP: f64 = 1e-5;
pub const GRADIENT_TOLERANCE: f64 = 1e-6;
pub const IDENTITY_TOLERANCE: f64 = 1e-12;
pub const GRADIENT_SCALE_FLOOR: f64 = 1e-3;
/// Factor applied to one analytic gradient when the corruption hook is on.
pub const CORRUPTION_FACTOR: f64 = 1.0 + 1e-3;

/// Central differences `(f(x + h eᵢ) − f(x − h eᵢ)) / 2h`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + step;
            let plus = f(&probe);
            probe[i] = x[i] - step;
            let minus = f(&probe);
            probe[i] = x[i];
            (plus - minus) / (2.0 * step)
        })
        .collect()
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs()).max(GRADIENT_SCALE_FLOOR);
    (analytic - numeric).abs() / scale
}

pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| relative_error(*a, *n))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckConfig {
    pub seed: u64,
    pub trials: usize,
    /// Test hook: perturbs the analytic size-loss gradient so the suite must
    /// fail.
    pub corrupt_gradient: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 1000,
            corrupt_gradient: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub tolerance: f64,
    pub samples: usize,
    pub worst_error: f64,
    /// Inputs of the worst sample, printable for reproduction.
    pub worst_input: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub seed: u64,
    pub trials: usize,
    pub results: Vec<PropertyResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn worst_gradient_error(&self) -> f64 {
        self.results
            .iter()
            .filter(|r| r.tolerance == GRADIENT_TOLERANCE)
            .map(|r| r.worst_error)
            .fold(0.0, f64::max)
    }
}

struct Tracker {
    name: &'static str,
    tolerance: f64,
    samples: usize,
    worst_error: f64,
    worst_input: String,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            tolerance,
            samples: 0,
            worst_error: 0.0,
            worst_input: String::new(),
        }
    }

    fn record(&mut self, error: f64, input: impl FnOnce() -> String) {
        self.samples += 1;
        // NaN counts as a failure
        if !(error <= self.worst_error) {
            self.worst_error = if error.is_nan() { f64::INFINITY } else { error };
            self.worst_input = input();
        }
    }

    fn finish(self) -> PropertyResult {
        PropertyResult {
            name: self.name,
            tolerance: self.tolerance,
            samples: self.samples,
            passed: self.worst_error <= self.tolerance,
            worst_error: self.worst_error,
            worst_input: self.worst_input,
        }
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Ground-truth size in a car-to-truck range.
pub fn sample_size(rng: &mut impl Rng) -> Dimensions {
    Dimensions::new(
        rng.random_range(0.5..5.0),
        rng.random_range(0.5..5.0),
        rng.random_range(0.5..5.0),
    )
}

/// Prediction whose side `i` is above ground truth iff bit `i` of `pattern`
/// is set, each side differing by 2–50 %.
pub fn sample_prediction(rng: &mut impl Rng, truth: &Dimensions, pattern: usize) -> Dimensions {
    let t = truth.as_array();
    let mut s = [0.0; 3];
    for i in 0..3 {
        let rel = rng.random_range(0.02..0.5);
        s[i] = if pattern & (1 << i) != 0 {
            t[i] * (1.0 + rel)
        } else {
            t[i] * (1.0 - rel)
        };
    }
    Dimensions::from_array(s)
}

fn describe_sizes(s: &Dimensions, t: &Dimensions) -> String {
    format!(
        "s = ({:e}, {:e}, {:e}), s* = ({:e}, {:e}, {:e})",
        s.h, s.w, s.l, t.h, t.w, t.l
    )
}

fn check_size_gradients(cfg: &CheckConfig) -> Result<[PropertyResult; 2], LossError> {
    let mut rng = rng_for(cfg.seed, 1);
    let mut stop = Tracker::new("size_loss_iou.gradient", GRADIENT_TOLERANCE);
    let mut full = Tracker::new("size_loss_iou.full_gradient", GRADIENT_TOLERANCE);
    for trial in 0..cfg.trials {
        let truth = sample_size(&mut rng);
        let s = sample_prediction(&mut rng, &truth, trial % 8);
        let out = size_loss_iou(&s, &truth)?;
        let t = truth.as_array();
        let frozen = s.as_array();
        let surrogate = |x: &[f64]| (0..3).map(|i| (x[i] - t[i]).abs() / frozen[i]).sum::<f64>();
        let numeric = central_difference(surrogate, &frozen, FD_STEP);
        let mut analytic = out.gradient;
        if cfg.corrupt_gradient {
            analytic = analytic.map(|g| g * CORRUPTION_FACTOR);
        }
        stop.record(max_relative_error(&analytic, &numeric), || describe_sizes(&s, &truth));

        let value = |x: &[f64]| {
            size_loss_iou(&Dimensions::new(x[0], x[1], x[2]), &truth)
                .map(|o| o.value)
                .unwrap_or(f64::NAN)
        };
        let numeric = central_difference(value, &frozen, FD_STEP);
        full.record(max_relative_error(&out.full_gradient, &numeric), || {
            describe_sizes(&s, &truth)
        });
    }
    Ok([stop.finish(), full.finish()])
}

fn check_iou_partials(cfg: &CheckConfig) -> PropertyResult {
    let mut rng = rng_for(cfg.seed, 2);
    let mut tracker = Tracker::new("iou_partial_ratio", GRADIENT_TOLERANCE);
    for trial in 0..cfg.trials {
        let truth = sample_size(&mut rng);
        let s = sample_prediction(&mut rng, &truth, trial % 8);
        let analytic = iou_partial_ratio(&s, &truth).partials;
        let numeric = central_difference(
            |x| iou_3d_axis_aligned(&Dimensions::new(x[0], x[1], x[2]), &truth),
            &s.as_array(),
            FD_STEP,
        );
        tracker.record(max_relative_error(&analytic, &numeric), || describe_sizes(&s, &truth));
    }
    tracker.finish()
}

/// Relative mismatch between the direction of two non-negative 3-vectors.
fn ratio_mismatch(actual: [f64; 3], expected: [f64; 3]) -> f64 {
    let na = actual.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ne = expected.iter().map(|v| v * v).sum::<f64>().sqrt();
    (0..3)
        .map(|i| (actual[i] / na - expected[i] / ne).abs())
        .fold(0.0, f64::max)
}

/// Closed-form ratio of `|∂IoU/∂h| : |∂IoU/∂w| : |∂IoU/∂l|` for each regime,
/// by permuting the two explicit mixed regimes over the axes.
pub fn closed_form_ratio(s: &Dimensions, truth: &Dimensions) -> [f64; 3] {
    let sv = s.as_array();
    let inv = sv.map(|v| 1.0 / v);
    match SizeRegime::classify(s, truth) {
        SizeRegime::AllUnder | SizeRegime::AllOver => inv,
        SizeRegime::OneOver(i) => {
            let mut r = inv;
            let others: f64 = (0..3).filter(|j| *j != i).map(|j| sv[j]).product();
            r[i] = others / truth.volume();
            r
        }
        SizeRegime::TwoOver(i) => {
            let mut r = inv;
            r[i] = truth.volume() / (s.volume() * sv[i]);
            r
        }
    }
}

fn check_closed_forms(cfg: &CheckConfig) -> PropertyResult {
    let mut rng = rng_for(cfg.seed, 3);
    let mut tracker = Tracker::new("iou_partial_ratio.closed_forms", IDENTITY_TOLERANCE);
    for trial in 0..cfg.trials {
        let truth = sample_size(&mut rng);
        let s = sample_prediction(&mut rng, &truth, trial % 8);
        let p = iou_partial_ratio(&s, &truth);
        let actual = p.partials.map(f64::abs);
        tracker.record(ratio_mismatch(actual, closed_form_ratio(&s, &truth)), || {
            describe_sizes(&s, &truth)
        });
    }
    tracker.finish()
}

fn check_kinks(cfg: &CheckConfig) -> Result<PropertyResult, LossError> {
    let mut rng = rng_for(cfg.seed, 4);
    let mut tracker = Tracker::new("kinks.flagged", 0.0);
    for trial in 0..cfg.trials {
        let truth = sample_size(&mut rng);
        let mut s = sample_prediction(&mut rng, &truth, trial % 8).as_array();
        let equal_axis = trial % 3;
        s[equal_axis] = truth.as_array()[equal_axis];
        let s = Dimensions::from_array(s);
        let partials = iou_partial_ratio(&s, &truth);
        let loss = size_loss_iou(&s, &truth)?;
        let ok = partials.one_sided[equal_axis]
            && loss.gradient[equal_axis] == 0.0
            && partials.one_sided.iter().filter(|f| **f).count() == 1;
        tracker.record(if ok { 0.0 } else { 1.0 }, || describe_sizes(&s, &truth));
    }
    Ok(tracker.finish())
}

fn check_compensation(cfg: &CheckConfig) -> Result<PropertyResult, LossError> {
    let mut rng = rng_for(cfg.seed, 5);
    let mut tracker = Tracker::new("size_loss_compensated.identity", IDENTITY_TOLERANCE);
    for trial in 0..cfg.trials {
        let truth = sample_size(&mut rng);
        let s = sample_prediction(&mut rng, &truth, trial % 8);
        let l1 = size_loss_l1(&s, &truth);
        let c = size_loss_compensated(&s, &truth)?;
        tracker.record((c.value - l1).abs() / l1, || describe_sizes(&s, &truth));
    }
    Ok(tracker.finish())
}

fn sample_residual(rng: &mut impl Rng) -> f64 {
    let magnitude = rng.random_range(0.05..10.0);
    if rng.random_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

fn check_depth(cfg: &CheckConfig) -> Result<[PropertyResult; 2], LossError> {
    let mut rng = rng_for(cfg.seed, 6);
    let mut laplace = Tracker::new("depth_loss_laplace", GRADIENT_TOLERANCE);
    let mut gaussian = Tracker::new("depth_loss_gaussian", GRADIENT_TOLERANCE);
    for _ in 0..cfg.trials {
        let target = rng.random_range(2.0..80.0);
        let depth = target + sample_residual(&mut rng);
        let sigma = rng.random_range(0.2..5.0);
        let out = depth_loss_laplace(DepthPrediction { depth, sigma }, target)?;
        let numeric = central_difference(
            |x| {
                depth_loss_laplace(DepthPrediction { depth: x[0], sigma: x[1] }, target)
                    .map(|o| o.value)
                    .unwrap_or(f64::NAN)
            },
            &[depth, sigma],
            FD_STEP,
        );
        laplace.record(
            max_relative_error(&[out.grad_depth, out.grad_scale], &numeric),
            || format!("d = {depth:e}, sigma = {sigma:e}, d* = {target:e}"),
        );

        let variance = rng.random_range(0.05..25.0);
        let out = depth_loss_gaussian(depth, variance, target)?;
        let numeric = central_difference(
            |x| {
                depth_loss_gaussian(x[0], x[1], target)
                    .map(|o| o.value)
                    .unwrap_or(f64::NAN)
            },
            &[depth, variance],
            FD_STEP,
        );
        gaussian.record(
            max_relative_error(&[out.grad_depth, out.grad_scale], &numeric),
            || format!("d = {depth:e}, variance = {variance:e}, d* = {target:e}"),
        );
    }
    Ok([laplace.finish(), gaussian.finish()])
}

fn check_heading(cfg: &CheckConfig) -> Result<[PropertyResult; 2], LossError> {
    let mut rng = rng_for(cfg.seed, 7);
    let mut grad = Tracker::new("heading_loss", GRADIENT_TOLERANCE);
    let mut round_trip = Tracker::new("heading_encode.round_trip", IDENTITY_TOLERANCE);
    for _ in 0..cfg.trials {
        let theta = rng.random_range(-10.0..10.0);
        let target = heading_encode(theta);
        round_trip.record(angular_distance(heading_decode(&target), theta), || {
            format!("theta = {theta:e}")
        });

        let logits: Vec<f64> = (0..12).map(|_| rng.random_range(-3.0..3.0)).collect();
        let residual = target.residual + sample_residual(&mut rng) * 0.01;
        let out = heading_loss(&logits, residual, theta)?;
        let mut x = logits.clone();
        x.push(residual);
        let numeric = central_difference(
            |x| {
                heading_loss(&x[..12], x[12], theta)
                    .map(|o| o.value)
                    .unwrap_or(f64::NAN)
            },
            &x,
            FD_STEP,
        );
        let mut analytic = out.grad_logits.to_vec();
        analytic.push(out.grad_residual);
        grad.record(max_relative_error(&analytic, &numeric), || {
            let mut s = format!("theta = {theta:e}, residual = {residual:e}, logits = [");
            for v in &logits {
                let _ = write!(s, "{v:e}, ");
            }
            s.push(']');
            s
        });
    }
    Ok([grad.finish(), round_trip.finish()])
}

fn check_sample_weights(cfg: &CheckConfig) -> PropertyResult {
    let mut rng = rng_for(cfg.seed, 8);
    let mut tracker = Tracker::new("sample_weight.soft_to_hard", 1e-3);
    for _ in 0..cfg.trials {
        let center = rng.random_range(20.0..80.0);
        let hard = SampleWeightParams::Hard { threshold: center };
        let soft = SampleWeightParams::Soft {
            center,
            temperature: 1e-4,
        };
        let mut offset = rng.random_range(0.0101..30.0);
        if rng.random_bool(0.5) {
            offset = -offset;
        }
        let d = center + offset;
        let mut err = (sample_weight(d, &soft) - sample_weight(d, &hard)).abs();
        let default_soft = SampleWeightParams::Soft {
            center,
            temperature: 1.0,
        };
        if sample_weight(center, &default_soft) != 0.5
            || sample_weight(d, &default_soft) <= sample_weight(d + 0.5, &default_soft)
        {
            err = f64::INFINITY;
        }
        tracker.record(err, || format!("d = {d:e}, c = {center:e}"));
    }
    tracker.finish()
}

/// Runs every loss property with `trials` samples each.
pub fn run_loss_checks(cfg: &CheckConfig) -> Result<CheckReport, LossError> {
    if cfg.trials == 0 {
        return Err(LossError::NoTrials);
    }
    let mut results = Vec::new();
    results.extend(check_size_gradients(cfg)?);
    results.push(check_iou_partials(cfg));
    results.push(check_closed_forms(cfg));
    results.push(check_kinks(cfg)?);
    results.push(check_compensation(cfg)?);
    results.extend(check_depth(cfg)?);
    results.extend(check_heading(cfg)?);
    results.push(check_sample_weights(cfg));
    Ok(CheckReport {
        seed: cfg.seed,
        trials: cfg.trials,
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_difference_on_quadratic() {
        let g = central_difference(|x| x[0] * x[0] + 3.0 * x[0] * x[1], &[2.0, -1.0], FD_STEP);
        assert!((g[0] - 1.0).abs() < 1e-8);
        assert!((g[1] - 6.0).abs() < 1e-8);
    }

    #[test]
    fn default_suite_passes() {
        let report = run_loss_checks(&CheckConfig {
            trials: 200,
            ..Default::default()
        })
        .unwrap();
        for r in &report.results {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn corruption_is_detected() {
        let report = run_loss_checks(&CheckConfig {
            trials: 20,
            corrupt_gradient: true,
            ..Default::default()
        })
        .unwrap();
        assert!(!report.passed());
        let failing: Vec<_> = report.results.iter().filter(|r| !r.passed).collect();
        assert_eq!(failing.len(), 1);
        assert_eq!(failing[0].name, "size_loss_iou.gradient");
        assert!(!failing[0].worst_input.is_empty());
    }

    #[test]
    fn zero_trials_rejected() {
        assert_eq!(
            run_loss_checks(&CheckConfig {
                trials: 0,
                ..Default::default()
            }),
            Err(LossError::NoTrials)
        );
    }
}
