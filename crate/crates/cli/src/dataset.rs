//! Per-image file association by filename stem.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mono3d::diagnosis::DiagnosisFrame;
use mono3d::kitti_io::{parse_calib_file, parse_label_file, parse_raw_outputs};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseFailure {
    pub stem: String,
    pub file: PathBuf,
    pub message: String,
}

#[derive(Debug, Default)]
pub struct Dataset {
    pub stems: Vec<String>,
    pub frames: Vec<DiagnosisFrame>,
    pub failures: Vec<ParseFailure>,
}

pub struct Sources<'a> {
    pub gt: &'a Path,
    pub calib: &'a Path,
    pub pred: Option<&'a Path>,
    pub raw: Option<&'a Path>,
}

fn stems(dir: &Path, extension: &str) -> Result<BTreeSet<String>> {
    let mut out = BTreeSet::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == extension) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.insert(stem.to_string());
            }
        }
    }
    Ok(out)
}

fn read(path: &Path) -> std::io::Result<Option<Vec<u8>>> {
    match std::fs::read(path) {
        Ok(bytes) => Ok(Some(bytes)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(e),
    }
}

fn load_one(stem: &str, src: &Sources) -> Result<DiagnosisFrame, ParseFailure> {
    let fail = |file: PathBuf, message: String| ParseFailure {
        stem: stem.to_string(),
        file,
        message,
    };
    let load = |path: PathBuf| read(&path).map_err(|e| fail(path.clone(), e.to_string())).map(|b| (path, b));

    let (gt_path, gt_bytes) = load(src.gt.join(format!("{stem}.txt")))?;
    let gts = parse_label_file(&gt_bytes.unwrap_or_default()).map_err(|e| fail(gt_path, e.to_string()))?;

    let (calib_path, calib_bytes) = load(src.calib.join(format!("{stem}.txt")))?;
    let calib = parse_calib_file(&calib_bytes.unwrap_or_default()).map_err(|e| fail(calib_path, e.to_string()))?;

    let preds = match src.pred {
        Some(dir) => {
            let (path, bytes) = load(dir.join(format!("{stem}.txt")))?;
            match bytes {
                Some(b) => parse_label_file(&b).map_err(|e| fail(path, e.to_string()))?,
                None => Vec::new(),
            }
        }
        None => Vec::new(),
    };

    let raw = match src.raw {
        Some(dir) => {
            let (path, bytes) = load(dir.join(format!("{stem}.json")))?;
            match bytes {
                Some(b) => Some(parse_raw_outputs(&b).map_err(|e| fail(path, e.to_string()))?),
                None => None,
            }
        }
        None => None,
    };

    Ok(DiagnosisFrame { gts, preds, calib, raw })
}

/// Loads every image whose stem has both a label file and a calibration
/// file. An image with no prediction file has no predictions; an image
/// with no raw-output file has `raw = None`. Images whose files fail to
/// parse are skipped and listed in `failures`.
pub fn load(src: &Sources) -> Result<Dataset> {
    let gt_stems = stems(src.gt, "txt")?;
    let calib_stems = stems(src.calib, "txt")?;
    let shared: Vec<String> = gt_stems.intersection(&calib_stems).cloned().collect();
    if shared.is_empty() {
        bail!(
            "no image stems shared between {} and {}",
            src.gt.display(),
            src.calib.display()
        );
    }
    let loaded: Vec<(String, Result<DiagnosisFrame, ParseFailure>)> =
        shared.into_par_iter().map(|stem| { let r = load_one(&stem, src); (stem, r) }).collect();

    let mut data = Dataset::default();
    for (stem, result) in loaded {
        match result {
            Ok(frame) => {
                data.stems.push(stem);
                data.frames.push(frame);
            }
            Err(f) => data.failures.push(f),
        }
    }
    log::info!("loaded {} images, {} failed", data.frames.len(), data.failures.len());
    Ok(data)
}
