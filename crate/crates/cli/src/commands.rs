use std::fmt::Write as _;

use anyhow::{bail, Result};
use mono3d::diagnosis::{
    depth_error_stats, loc_error_table, misalignment_stats, run_substitution_table, DiagnosisReport, SubstituteOptions,
    DEFAULT_FOCAL, PAIRING_IOU,
};
use mono3d::evaluation::{ap40, rangewise_eval, BucketOrder, Difficulty, EvalConfig, Frame, Task};
use mono3d::losses::gradcheck::{run_loss_checks, CheckConfig};
use mono3d::losses::{sample_weight, SampleWeightParams};
use mono3d::report::{bucket_stats_csv, diagnosis_csv, loc_error_csv, metric_rows_csv, to_json, MetricRow};
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::dataset::{self, Dataset, ParseFailure, Sources};
use crate::output::emit;

/// Outcomes other than configuration errors, which travel as `anyhow` errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    PartialData,
    PropertyFailure,
}

fn load(cfg: &RunConfig, need_pred: bool) -> Result<Dataset> {
    let gt = RunConfig::require_dir(&cfg.gt_dir, "gt")?;
    let calib = RunConfig::require_dir(&cfg.calib_dir, "calib")?;
    let pred = if need_pred || cfg.pred_dir.is_some() {
        Some(RunConfig::require_dir(&cfg.pred_dir, "pred")?)
    } else {
        None
    };
    let raw = match &cfg.raw_outputs_dir {
        Some(_) => Some(RunConfig::require_dir(&cfg.raw_outputs_dir, "raw")?),
        None => None,
    };
    let data = dataset::load(&Sources { gt, calib, pred, raw })?;
    for f in &data.failures {
        eprintln!("skipped image {}: {}: {}", f.stem, f.file.display(), f.message);
    }
    Ok(data)
}

fn status(failures: &[ParseFailure]) -> Status {
    if failures.is_empty() {
        Status::Success
    } else {
        Status::PartialData
    }
}

fn eval_frames(data: &Dataset) -> Vec<Frame> {
    data.frames.iter().map(|f| Frame::new(f.gts.clone(), f.preds.clone())).collect()
}

fn grid(cfg: &RunConfig) -> Vec<EvalConfig> {
    let mut out = Vec::new();
    for &category in &cfg.categories {
        for task in cfg.tasks_or(&Task::ALL) {
            for difficulty in cfg.difficulties_or(&Difficulty::ALL) {
                for threshold in cfg.thresholds_for(category) {
                    let mut c = EvalConfig::new(task, category, difficulty).with_threshold(threshold);
                    c.bucket_order = cfg.bucket_order;
                    out.push(c);
                }
            }
        }
    }
    out
}

#[derive(Serialize)]
struct EvalReport<'a> {
    images: usize,
    rows: &'a [MetricRow],
    parse_failures: &'a [ParseFailure],
}

pub fn eval(cfg: &RunConfig) -> Result<Status> {
    let data = load(cfg, true)?;
    let frames = eval_frames(&data);
    let rows = grid(cfg)
        .iter()
        .map(|c| Ok(MetricRow::new(c, &ap40(&frames, c)?)))
        .collect::<Result<Vec<_>>>()?;
    let json = to_json(&EvalReport {
        images: frames.len(),
        rows: &rows,
        parse_failures: &data.failures,
    });
    emit(cfg.output_dir.as_deref(), cfg.format, "eval", &metric_rows_csv(&rows), &json)?;
    Ok(status(&data.failures))
}

#[derive(Serialize)]
struct RangeReport<'a> {
    images: usize,
    interval: f64,
    bucket_order: BucketOrder,
    /// What happens to a counted ground truth outside the bucket.
    out_of_bucket_gt: &'static str,
    out_of_bucket_predictions: &'static str,
    rows: &'a [MetricRow],
    parse_failures: &'a [ParseFailure],
}

pub fn range_eval(cfg: &RunConfig) -> Result<Status> {
    let data = load(cfg, true)?;
    let frames = eval_frames(&data);
    let mut rows = Vec::new();
    for c in grid(cfg) {
        for b in rangewise_eval(&frames, &c, cfg.range_interval)? {
            rows.push(MetricRow::new(&c.with_bucket(Some(b.bucket)), &b.result));
        }
    }
    let json = to_json(&RangeReport {
        images: frames.len(),
        interval: cfg.range_interval,
        bucket_order: cfg.bucket_order,
        out_of_bucket_gt: match cfg.bucket_order {
            BucketOrder::DifficultyFirst => "ignored",
            BucketOrder::BucketFirst => "excluded",
        },
        out_of_bucket_predictions: "dropped",
        rows: &rows,
        parse_failures: &data.failures,
    });
    emit(cfg.output_dir.as_deref(), cfg.format, "range_eval", &metric_rows_csv(&rows), &json)?;
    Ok(status(&data.failures))
}

#[derive(Serialize)]
struct DiagnoseOutput<'a> {
    images: usize,
    #[serde(flatten)]
    report: &'a DiagnosisReport,
    parse_failures: &'a [ParseFailure],
}

pub fn diagnose(cfg: &RunConfig) -> Result<Status> {
    let data = load(cfg, true)?;
    let category = cfg.categories[0];
    let task = cfg.tasks_or(&[Task::Detect3D])[0];
    let difficulty = cfg.difficulties_or(&[Difficulty::Moderate])[0];
    let threshold = cfg.thresholds_for(category)[0];
    let mut config = EvalConfig::new(task, category, difficulty).with_threshold(threshold);
    config.bucket_order = cfg.bucket_order;
    let options = SubstituteOptions {
        pairing_iou: PAIRING_IOU,
        reference: cfg.reference,
    };
    let report = run_substitution_table(&data.frames, &config, &options)?;
    if report.degraded {
        eprintln!("degraded: some images have no raw head outputs; projected centers derived from predicted boxes");
    }
    let json = to_json(&DiagnoseOutput {
        images: data.frames.len(),
        report: &report,
        parse_failures: &data.failures,
    });
    emit(cfg.output_dir.as_deref(), cfg.format, "diagnosis", &diagnosis_csv(&report), &json)?;
    Ok(status(&data.failures))
}

#[derive(Debug, Serialize)]
struct WeightBucket {
    bucket_center: f64,
    count: usize,
    weight_at_center: f64,
    mean_weight: Option<f64>,
}

fn weight_buckets(depths: &[f64], interval: f64, params: &SampleWeightParams) -> Vec<WeightBucket> {
    let last = depths.iter().map(|z| (z / interval + 0.5).floor().max(1.0) as usize).max().unwrap_or(0);
    (1..=last)
        .map(|k| {
            let center = k as f64 * interval;
            let inside: Vec<f64> = depths
                .iter()
                .filter(|z| (**z / interval + 0.5).floor().max(1.0) as usize == k)
                .map(|z| sample_weight(*z, params))
                .collect();
            WeightBucket {
                bucket_center: center,
                count: inside.len(),
                weight_at_center: sample_weight(center, params),
                mean_weight: (!inside.is_empty()).then(|| inside.iter().sum::<f64>() / inside.len() as f64),
            }
        })
        .collect()
}

fn weight_csv(buckets: &[WeightBucket]) -> String {
    let mut out = String::from("bucket_center,count,weight_at_center,mean_weight\n");
    for b in buckets {
        let mean = b.mean_weight.map_or_else(String::new, |m| format!("{m:.6}"));
        let _ = writeln!(out, "{:.1},{},{:.6},{}", b.bucket_center, b.count, b.weight_at_center, mean);
    }
    out
}

pub fn stats(cfg: &RunConfig) -> Result<Status> {
    let data = load(cfg, false)?;
    let out = cfg.output_dir.as_deref();
    let images: Vec<_> = data.frames.iter().map(|f| (f.gts.as_slice(), &f.calib)).collect();
    let mis = misalignment_stats(&images, cfg.range_interval, cfg.reference)?;
    emit(out, cfg.format, "misalignment", &bucket_stats_csv(&mis.buckets), &to_json(&mis))?;

    if cfg.pred_dir.is_some() {
        let depth = depth_error_stats(&eval_frames(&data), cfg.range_interval)?;
        emit(out, cfg.format, "depth_error", &bucket_stats_csv(&depth), &to_json(&depth))?;
    }

    let depths: Vec<f64> = data
        .frames
        .iter()
        .flat_map(|f| f.gts.iter().filter(|g| !g.is_dont_care() && g.depth() > 0.0).map(|g| g.depth()))
        .collect();
    let weights = weight_buckets(&depths, cfg.range_interval, &cfg.weight_scheme);
    #[derive(Serialize)]
    struct Weights<'a> {
        scheme: SampleWeightParams,
        buckets: &'a [WeightBucket],
    }
    let json = to_json(&Weights {
        scheme: cfg.weight_scheme,
        buckets: &weights,
    });
    emit(out, cfg.format, "sample_weight", &weight_csv(&weights), &json)?;
    Ok(status(&data.failures))
}

pub struct LocErrorArgs<'a> {
    pub shifts: &'a [(f64, f64)],
    pub depths: &'a [f64],
    pub focal: f64,
    pub out: Option<&'a std::path::Path>,
    pub format: Format,
}

pub fn loc_error(args: &LocErrorArgs) -> Result<Status> {
    if !(args.focal > 0.0 && args.focal.is_finite()) {
        bail!("focal length must be positive, got {}", args.focal);
    }
    if let Some(z) = args.depths.iter().find(|z| !(**z > 0.0 && z.is_finite())) {
        bail!("depths must be positive, got {z}");
    }
    let table = loc_error_table(args.shifts, args.depths, args.focal);
    emit(args.out, args.format, "loc_error", &loc_error_csv(&table), &to_json(&table))?;
    Ok(Status::Success)
}

pub fn default_focal() -> f64 {
    DEFAULT_FOCAL
}

pub fn loss_check(cfg: &CheckConfig) -> Result<Status> {
    let report = run_loss_checks(cfg)?;
    println!("seed {} trials {}", report.seed, report.trials);
    for r in &report.results {
        println!(
            "{:<4} {:<40} worst {:.3e} (tolerance {:.0e}, {} samples)",
            if r.passed { "ok" } else { "FAIL" },
            r.name,
            r.worst_error,
            r.tolerance,
            r.samples
        );
        if !r.passed {
            println!("     reproduce with: {}", r.worst_input);
        }
    }
    println!("worst gradient relative error {:.3e}", report.worst_gradient_error());
    Ok(if report.passed() {
        Status::Success
    } else {
        Status::PropertyFailure
    })
}
