//! Flat report rows with CSV and JSON renderings. Output is a pure function
//! of the inputs, so repeated runs produce byte-identical files.

use std::fmt::Write as _;

use serde::Serialize;

use crate::diagnosis::{DepthBucketStats, DiagnosisReport, LocErrorTable};
use crate::evaluation::{EvalConfig, EvalFlag, EvalResult};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub task: String,
    pub category: String,
    pub difficulty: String,
    pub iou_threshold: f64,
    pub bucket_center: Option<f64>,
    pub ap40: f64,
    pub num_gt: usize,
    pub num_pred: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub flag: Option<EvalFlag>,
}

impl MetricRow {
    pub fn new(config: &EvalConfig, result: &EvalResult) -> Self {
        Self {
            task: config.task.to_string(),
            category: config.category.to_string(),
            difficulty: config.difficulty.to_string(),
            iou_threshold: config.iou_threshold,
            bucket_center: config.depth_bucket.map(|b| b.center),
            ap40: result.ap40,
            num_gt: result.counts.num_gt,
            num_pred: result.counts.num_pred,
            true_positives: result.counts.true_positives,
            false_positives: result.counts.false_positives,
            flag: result.flag,
        }
    }
}

fn opt(v: Option<f64>, precision: usize) -> String {
    v.map_or_else(String::new, |v| format!("{v:.precision$}"))
}

pub fn metric_rows_csv(rows: &[MetricRow]) -> String {
    let mut out =
        String::from("task,category,difficulty,iou_threshold,bucket_center,ap40,num_gt,num_pred,tp,fp,flag\n");
    for r in rows {
        let flag = match r.flag {
            Some(EvalFlag::Undefined) => "undefined",
            None => "",
        };
        let _ = writeln!(
            out,
            "{},{},{},{:.2},{},{:.4},{},{},{},{},{}",
            r.task,
            r.category,
            r.difficulty,
            r.iou_threshold,
            opt(r.bucket_center, 1),
            r.ap40,
            r.num_gt,
            r.num_pred,
            r.true_positives,
            r.false_positives,
            flag
        );
    }
    out
}

pub fn diagnosis_csv(report: &DiagnosisReport) -> String {
    let mut out = String::from("row,ap40,matched,unmatched_gt,unmatched_pred,degraded_objects,skipped\n");
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{:.4},{},{},{},{},{}",
            r.label,
            r.ap40,
            r.meta.matched,
            r.meta.unmatched_gt,
            r.meta.unmatched_pred,
            r.meta.degraded_objects,
            r.meta.skipped
        );
    }
    out
}

/// One row per shift, one column per depth, values in meters.
pub fn loc_error_csv(table: &LocErrorTable) -> String {
    let mut out = String::from("du,dv");
    for z in &table.depths {
        let _ = write!(out, ",z{z}");
    }
    out.push('\n');
    for ((du, dv), cells) in table.shifts.iter().zip(&table.cells) {
        let _ = write!(out, "{du},{dv}");
        for c in cells {
            let _ = write!(out, ",{c:.4}");
        }
        out.push('\n');
    }
    out
}

/// `(bucket_center, mean)` series, suitable for plotting.
pub fn bucket_stats_csv(stats: &[DepthBucketStats]) -> String {
    let mut out = String::from("bucket_center,count,mean_abs_error,std\n");
    for s in stats {
        let _ = writeln!(
            out,
            "{:.1},{},{},{}",
            s.bucket_center,
            s.count,
            opt(s.mean_abs_error, 4),
            opt(s.std, 4)
        );
    }
    out
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}
