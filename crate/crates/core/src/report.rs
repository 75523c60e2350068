//! Report serialization helpers.
//!
//! JSON is the canonical report format; CSV projections are produced where a
//! flat table is the natural interface. Floats serialize in the shortest
//! form that round-trips exactly, so reruns with identical configuration and
//! seed produce byte-identical files regardless of thread count.

use serde::{Serialize, Serializer};

/// Nonnegative extended real for reports. JSON has no infinity literal, so
/// `+inf` serializes as the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReportValue {
    Finite(f64),
    PosInf,
}

impl ReportValue {
    pub fn from_f64(v: f64) -> Self {
        if v.is_finite() {
            ReportValue::Finite(v)
        } else {
            ReportValue::PosInf
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ReportValue::Finite(_))
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            ReportValue::Finite(v) => v,
            ReportValue::PosInf => f64::INFINITY,
        }
    }
}

impl Serialize for ReportValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match *self {
            ReportValue::Finite(v) => serializer.serialize_f64(v),
            ReportValue::PosInf => serializer.serialize_str("inf"),
        }
    }
}

/// Envelope embedded in every machine-readable report: command, seed and
/// artifact version for provenance, plus the statistical configuration.
/// Execution details (thread count, output path) are deliberately excluded
/// so reports are byte-identical across thread counts.
#[derive(Debug, Clone, Serialize)]
pub struct Report<C: Serialize, R: Serialize> {
    pub artifact: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config: C,
    pub results: R,
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types are serializable");
    s.push('\n');
    s
}
