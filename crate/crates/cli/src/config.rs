//! Run configuration: an optional TOML file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use mono3d::evaluation::{default_iou_threshold, BucketOrder, Difficulty, Task};
use mono3d::geometry::ReferencePoint;
use mono3d::kitti_io::Category;
use mono3d::losses::SampleWeightParams;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceArg {
    Bottom,
    Volumetric,
}

impl From<ReferenceArg> for ReferencePoint {
    fn from(r: ReferenceArg) -> Self {
        match r {
            ReferenceArg::Bottom => ReferencePoint::BottomCenter,
            ReferenceArg::Volumetric => ReferencePoint::VolumetricCenter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BucketOrderArg {
    DifficultyFirst,
    BucketFirst,
}

impl From<BucketOrderArg> for BucketOrder {
    fn from(b: BucketOrderArg) -> Self {
        match b {
            BucketOrderArg::DifficultyFirst => BucketOrder::DifficultyFirst,
            BucketOrderArg::BucketFirst => BucketOrder::BucketFirst,
        }
    }
}

/// Flags shared by the data-driven subcommands. Every flag may also be set
/// in the `--config` file; flags win.
#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Ground-truth label directory.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Prediction directory (16-field rows with score).
    #[arg(long)]
    pub pred: Option<PathBuf>,
    /// Calibration directory.
    #[arg(long)]
    pub calib: Option<PathBuf>,
    /// Raw head-output JSON directory.
    #[arg(long)]
    pub raw: Option<PathBuf>,
    /// Report directory; reports go to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Categories, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub category: Vec<String>,
    /// Difficulties, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub difficulty: Vec<String>,
    /// IoU thresholds, comma separated; per-category defaults otherwise.
    #[arg(long, value_delimiter = ',')]
    pub threshold: Vec<f64>,
    /// Tasks (2d, bev, 3d, aos), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub task: Vec<String>,
    /// Depth bucket spacing in meters.
    #[arg(long)]
    pub interval: Option<f64>,
    #[arg(long, value_enum)]
    pub reference: Option<ReferenceArg>,
    #[arg(long, value_enum)]
    pub bucket_order: Option<BucketOrderArg>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    gt_dir: Option<PathBuf>,
    pred_dir: Option<PathBuf>,
    calib_dir: Option<PathBuf>,
    raw_outputs_dir: Option<PathBuf>,
    output_dir: Option<PathBuf>,
    format: Option<Format>,
    categories: Option<Vec<String>>,
    difficulties: Option<Vec<String>>,
    thresholds: Option<Vec<f64>>,
    tasks: Option<Vec<String>>,
    range_interval: Option<f64>,
    reference: Option<ReferenceArg>,
    bucket_order: Option<BucketOrderArg>,
    weight_scheme: Option<SampleWeightParams>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub gt_dir: Option<PathBuf>,
    pub pred_dir: Option<PathBuf>,
    pub calib_dir: Option<PathBuf>,
    pub raw_outputs_dir: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub format: Format,
    pub categories: Vec<Category>,
    /// `None` when neither the flags nor the file chose any.
    pub difficulties: Option<Vec<Difficulty>>,
    pub thresholds: Vec<f64>,
    pub tasks: Option<Vec<Task>>,
    pub range_interval: f64,
    pub reference: ReferencePoint,
    pub bucket_order: BucketOrder,
    pub weight_scheme: SampleWeightParams,
}

fn parse_all<T: std::str::FromStr>(items: &[String], what: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    items
        .iter()
        .map(|s| s.trim().parse::<T>().map_err(|e| anyhow::anyhow!("invalid {what} `{s}`: {e}")))
        .collect()
}

fn pick<T>(flag: Vec<T>, file: Option<Vec<T>>) -> Option<Vec<T>> {
    if flag.is_empty() {
        file
    } else {
        Some(flag)
    }
}

impl RunConfig {
    pub fn resolve(args: &DataArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config {}", path.display()))?;
                toml::from_str::<FileConfig>(&text).with_context(|| format!("parsing config {}", path.display()))?
            }
            None => FileConfig::default(),
        };

        let categories: Vec<Category> = match pick(args.category.clone(), file.categories) {
            Some(c) => parse_all(&c, "category")?,
            None => vec![Category::Car],
        };
        let difficulties = pick(args.difficulty.clone(), file.difficulties)
            .map(|d| parse_all(&d, "difficulty"))
            .transpose()?;
        let tasks = pick(args.task.clone(), file.tasks).map(|t| parse_all(&t, "task")).transpose()?;
        let thresholds = pick(args.threshold.clone(), file.thresholds).unwrap_or_default();
        if let Some(t) = thresholds.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
            bail!("IoU threshold {t} outside (0, 1]");
        }
        if categories.is_empty()
            || difficulties.as_ref().is_some_and(Vec::is_empty)
            || tasks.as_ref().is_some_and(Vec::is_empty)
        {
            bail!("categories, difficulties and tasks must be non-empty");
        }
        let range_interval = args.interval.or(file.range_interval).unwrap_or(10.0);
        if !(range_interval > 0.0 && range_interval.is_finite()) {
            bail!("interval must be a positive number of meters, got {range_interval}");
        }
        let weight_scheme = file.weight_scheme.unwrap_or_default();
        weight_scheme.validate()?;

        Ok(Self {
            gt_dir: args.gt.clone().or(file.gt_dir),
            pred_dir: args.pred.clone().or(file.pred_dir),
            calib_dir: args.calib.clone().or(file.calib_dir),
            raw_outputs_dir: args.raw.clone().or(file.raw_outputs_dir),
            output_dir: args.out.clone().or(file.output_dir),
            format: args.format.or(file.format).unwrap_or_default(),
            categories,
            difficulties,
            thresholds,
            tasks,
            range_interval,
            reference: args.reference.or(file.reference).map_or_else(ReferencePoint::default, Into::into),
            bucket_order: args.bucket_order.or(file.bucket_order).map_or_else(BucketOrder::default, Into::into),
            weight_scheme,
        })
    }

    pub fn tasks_or(&self, default: &[Task]) -> Vec<Task> {
        self.tasks.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn difficulties_or(&self, default: &[Difficulty]) -> Vec<Difficulty> {
        self.difficulties.clone().unwrap_or_else(|| default.to_vec())
    }

    /// Explicit thresholds, or the category's default.
    pub fn thresholds_for(&self, category: Category) -> Vec<f64> {
        if self.thresholds.is_empty() {
            vec![default_iou_threshold(category)]
        } else {
            self.thresholds.clone()
        }
    }

    pub fn require_dir<'a>(dir: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
        let dir = dir.as_deref().with_context(|| format!("--{flag} is required"))?;
        if !dir.is_dir() {
            bail!("--{flag} directory {} does not exist", dir.display());
        }
        Ok(dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "gt_dir = \"a\"\ncategories = [\"Pedestrian\"]\nrange_interval = 5.0\nformat = \"json\"\n\
             [weight_scheme]\nscheme = \"hard\"\nthreshold = 40.0\n",
        )
        .unwrap();
        let args = DataArgs {
            config: Some(path),
            gt: Some("b".into()),
            interval: Some(15.0),
            ..DataArgs::default()
        };
        let cfg = RunConfig::resolve(&args).unwrap();
        assert_eq!(cfg.gt_dir.as_deref(), Some(Path::new("b")));
        assert_eq!(cfg.categories, vec![Category::Pedestrian]);
        assert_eq!(cfg.range_interval, 15.0);
        assert_eq!(cfg.format, Format::Json);
        assert_eq!(cfg.weight_scheme, SampleWeightParams::Hard { threshold: 40.0 });
        assert_eq!(cfg.thresholds_for(Category::Pedestrian), vec![0.5]);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "gt = \"a\"\n").unwrap();
        let args = DataArgs { config: Some(path), ..DataArgs::default() };
        assert!(RunConfig::resolve(&args).is_err());

        let args = DataArgs { threshold: vec![1.5], ..DataArgs::default() };
        assert!(RunConfig::resolve(&args).is_err());
        let args = DataArgs { category: vec!["Boat".into()], ..DataArgs::default() };
        assert!(RunConfig::resolve(&args).is_err());
    }
}
