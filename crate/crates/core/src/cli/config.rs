//! Run configuration, read from a JSON object.
//!
//! Every section and field is optional; missing values take the defaults
//! below. Unknown keys are rejected so typos surface as errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::geodesic::GeodesicProblem;
use crate::geometry::{GeometryConfig, JetPoint};

use super::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometrySection {
    pub n: usize,
    pub sigma: String,
    pub h11: String,
    #[serde(rename = "K")]
    pub k: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self {
            n: 3,
            sigma: "x1*x2".into(),
            h11: "exp(2*t)".into(),
            k: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl From<&PointSpec> for JetPoint {
    fn from(p: &PointSpec) -> Self {
        JetPoint::new(p.t, p.x.clone(), p.y.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub samples: usize,
    pub seed: u64,
    /// Per-check tolerance overrides, keyed by check name.
    pub tolerances: BTreeMap<String, f64>,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            samples: 100,
            seed: 42,
            tolerances: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicSection {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub geometry: GeometrySection,
    pub points: Vec<PointSpec>,
    pub verify: VerifySection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geodesic: Option<GeodesicSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_json(&text)
    }

    pub fn geometry(&self) -> Result<GeometryConfig, GeometryError> {
        let g = &self.geometry;
        GeometryConfig::new(g.n, &g.sigma, &g.h11, g.k)
    }

    pub fn geodesic_problem(&self) -> Result<GeodesicProblem, CliError> {
        let s = self.geodesic.as_ref().ok_or(CliError::MissingGeodesic)?;
        Ok(GeodesicProblem {
            cfg: self.geometry()?,
            t0: s.t0,
            t1: s.t1,
            x0: s.x0.clone(),
            y0: s.y0.clone(),
            steps: s.steps,
        })
    }
}
