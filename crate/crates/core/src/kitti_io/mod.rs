//! KITTI object label, prediction and calibration files, plus the JSON
//! sidecar that carries raw detector head outputs.

mod calib;
mod label;
mod raw;

pub use calib::{parse_calib_file, Calibration, CANONICAL_ROW_TOLERANCE};
pub use label::{
    parse_label_file, write_label_file, Category, ObjectLabel, UnknownCategory, LABEL_FIELDS,
    PREDICTION_FIELDS,
};
pub use raw::{parse_raw_outputs, write_raw_outputs, RawHeadOutputs, HEADING_BINS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: not valid UTF-8")]
    InvalidUtf8 { line: usize },
    #[error("line {line}: expected 15 or 16 fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}, field {field}: cannot parse `{token}` as a number")]
    InvalidNumber {
        line: usize,
        field: usize,
        token: String,
    },
    #[error("line {line}: unknown object category `{token}`")]
    UnknownCategory { line: usize, token: String },
    #[error("line {line}, field {field}: {reason}")]
    InvalidValue {
        line: usize,
        field: usize,
        reason: &'static str,
    },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CalibError {
    #[error("no P2 line in calibration file")]
    MissingP2,
    #[error("line {line}: not valid UTF-8")]
    InvalidUtf8 { line: usize },
    #[error("line {line}: P2 needs 12 values, found {found}")]
    WrongValueCount { line: usize, found: usize },
    #[error("line {line}, value {position}: cannot parse `{token}` as a number")]
    InvalidNumber {
        line: usize,
        position: usize,
        token: String,
    },
    #[error("projection matrix has non-finite entries")]
    NonFinite,
    #[error("focal lengths must be positive (fu = {fu}, fv = {fv})")]
    NonPositiveFocal { fu: f64, fv: f64 },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RawOutputsError {
    #[error("malformed raw-outputs JSON: {0}")]
    Json(String),
    #[error("record {record}: missing key `{key}`")]
    MissingKey { record: usize, key: &'static str },
    #[error("record {record}: expected 12 heading logits, found {found}")]
    WrongLogitCount { record: usize, found: usize },
    #[error("record {record}: depth must be positive, got {value}")]
    InvalidDepth { record: usize, value: f64 },
    #[error("record {record}: depth_sigma must be positive, got {value}")]
    InvalidSigma { record: usize, value: f64 },
    #[error("record {record}: score must lie in [0, 1], got {value}")]
    InvalidScore { record: usize, value: f64 },
    #[error("record {record}: `{key}` has non-finite values")]
    NonFinite { record: usize, key: &'static str },
}
