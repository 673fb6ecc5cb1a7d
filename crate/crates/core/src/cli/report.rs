//! Machine-readable run reports.

use ndarray::{Array2, Array3, Array4};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::GeometryError;
use crate::expr::ExprError;
use crate::geodesic::{GeodesicError, Trajectory};

use super::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub anchor: String,
    pub max_dev: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicSummary {
    pub step: f64,
    pub samples: usize,
    pub completed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub el_residual: Option<f64>,
}

/// A structured error. `which` names the offending expression and
/// `offset` the byte offset of a syntax error, when applicable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub which: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point: Option<usize>,
}

impl ErrorRecord {
    pub fn from_geometry(e: &GeometryError) -> Self {
        let (kind, which, offset) = match e {
            GeometryError::Expr { which, source } => {
                let (kind, offset) = match source {
                    ExprError::Syntax { offset, .. } => ("syntax", Some(*offset)),
                    ExprError::UnknownIdentifier { offset, .. } => ("unknown-identifier", Some(*offset)),
                    ExprError::Domain(_) => ("expression-domain", None),
                    _ => ("expression", None),
                };
                (kind, Some(which.to_string()), offset)
            }
            GeometryError::OutOfDomain(_) | GeometryError::NonPositiveH11 { .. } => ("domain", None, None),
            GeometryError::Stencil(_) => ("stencil", None, None),
            GeometryError::Transform(_) => ("transform", None, None),
            _ => ("geometry", None, None),
        };
        Self {
            kind: kind.into(),
            message: e.to_string(),
            which,
            offset,
            point: None,
        }
    }

    pub fn from_cli(e: &CliError) -> Self {
        match e {
            CliError::Geometry(g) => Self::from_geometry(g),
            CliError::Geodesic(GeodesicError::Geometry(g)) => Self::from_geometry(g),
            other => Self {
                kind: other.kind().into(),
                message: other.to_string(),
                which: None,
                offset: None,
                point: None,
            },
        }
    }

    pub fn at_point(mut self, index: usize) -> Self {
        self.point = Some(index);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub meta: Value,
    pub points: Vec<Value>,
    pub checks: Vec<Check>,
    pub trajectory: Vec<TrajectorySample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geodesic: Option<GeodesicSummary>,
    pub errors: Vec<ErrorRecord>,
}

impl Report {
    pub fn new(meta: Value) -> Self {
        Self {
            meta,
            points: Vec::new(),
            checks: Vec::new(),
            trajectory: Vec::new(),
            geodesic: None,
            errors: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// 0 when everything passed, 1 when a check failed, 2 when a
    /// configuration or domain error was recorded.
    pub fn exit_code(&self) -> i32 {
        if !self.errors.is_empty() {
            2
        } else if !self.all_pass() {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn set_trajectory(&mut self, traj: &Trajectory) {
        self.trajectory = traj
            .samples
            .iter()
            .map(|s| TrajectorySample {
                t: s.t,
                x: s.x.clone(),
                y: s.y.clone(),
            })
            .collect();
    }
}

pub(crate) fn a2(a: &Array2<f64>) -> Value {
    json!(a.outer_iter().map(|r| r.to_vec()).collect::<Vec<_>>())
}

pub(crate) fn a3(a: &Array3<f64>) -> Value {
    Value::Array(a.outer_iter().map(|m| a2(&m.to_owned())).collect())
}

pub(crate) fn a4(a: &Array4<f64>) -> Value {
    Value::Array(a.outer_iter().map(|m| a3(&m.to_owned())).collect())
}
