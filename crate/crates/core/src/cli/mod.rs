//! Configuration loading, the `eval` / `verify` / `geodesic` scenarios and
//! report emission for the `bmjet` binary.

pub mod config;
pub mod report;
pub mod sampling;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use thiserror::Error;

use crate::connection::{cartan_at, torsions_at};
use crate::curvature::{curvature_at, einstein_at, em_tensor_at, stress_energy_at};
use crate::error::GeometryError;
use crate::geodesic::{el_residual, integrate, GeodesicError};
use crate::geometry::{Frame, GeometryConfig, JetPoint};

pub use config::RunConfig;
pub use report::{Check, ErrorRecord, Report};
use report::{a2, a3, a4, GeodesicSummary};
use sampling::Sampler;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Geodesic(#[from] GeodesicError),
    #[error("the configuration has no `geodesic` section")]
    MissingGeodesic,
    #[error("unknown check `{0}` in verify.tolerances")]
    UnknownCheck(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Config(_) => "config",
            CliError::Geometry(_) => "geometry",
            CliError::Geodesic(_) => "geodesic",
            CliError::MissingGeodesic => "missing-geodesic",
            CliError::UnknownCheck(_) => "unknown-check",
        }
    }

    pub fn exit_code(&self) -> i32 {
        2
    }
}

fn meta(command: &str, cfg: &RunConfig) -> Value {
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": cfg.verify.seed,
        "samples": cfg.verify.samples,
        "config": cfg,
    })
}

/// Every closed-form object at one point.
pub fn point_payload(cfg: &GeometryConfig, p: &JetPoint) -> Result<Value, GeometryError> {
    let f = Frame::new(cfg, p)?;
    let b = cartan_at(&f);
    let t = torsions_at(&f);
    let c = curvature_at(&f);
    let e = einstein_at(&f);
    let se = stress_energy_at(&f, cfg.einstein_k());
    let zero = |blocks: &[crate::curvature::ZeroBlock]| -> Value {
        blocks.iter().map(|z| (z.name.to_string(), json!(z.values))).collect::<serde_json::Map<_, _>>().into()
    };
    Ok(json!({
        "t": p.t,
        "x": p.x,
        "y": p.y,
        "fstar": f.metric.fstar,
        "g": a2(&f.metric.g),
        "g_inv": a2(&f.metric.g_inv),
        "spray": { "H": b.h, "G": b.gs },
        "nonlinear": { "M": b.m, "N": a2(&b.n) },
        "cartan": { "kappa": b.kappa, "G_j1": a2(&b.g_j1), "L": a3(&b.l), "C": a3(&b.c) },
        "torsion": { "R": a3(&t.r), "P": a3(&t.p) },
        "curvature": { "R": a4(&c.r_curv), "P": a4(&c.p_curv), "S": a4(&c.s_curv) },
        "ricci": { "R": a2(&c.ricci_r), "S": a2(&c.ricci_s) },
        "Y11": c.y11,
        "Sc": c.scalar_curvature,
        "einstein": { "tt": e.tt, "xx": a2(&e.xx), "vv": a2(&e.vv), "zero": zero(&e.zero) },
        "stress_energy": {
            "T11": se.t11,
            "T_ij": a2(&se.t_ij),
            "T_vv": a2(&se.t_vv),
            "zero": zero(&se.zero_blocks),
            "T^1_1": se.t_up1_down1,
            "T^m_1": se.t_up_m_down1,
            "T^(m)_(1)1": se.t_vert_m_down1,
            "T^1_i": se.t_up1_down_i,
            "T^m_i": a2(&se.e_mixed),
            "T^(m)_(1)i": a2(&se.t_vert_m_down_i),
            "T^1(1)_(i)": se.t_up1_vert_i,
            "T^m(1)_(i)": a2(&se.t_up_m_vert_i),
            "T^(m)(1)_(1)(i)": a2(&se.t_vert_vert),
        },
        "em": a2(&em_tensor_at(&f)),
    }))
}

/// Evaluates every object at the listed points (or at `t = 0, x = 0,
/// y = (1, …, 1)` when none are listed). A point outside the domain is
/// recorded as an error and the run continues.
pub fn run_eval(cfg: &RunConfig) -> Result<Report, CliError> {
    let geo = cfg.geometry()?;
    let n = geo.n();
    let points: Vec<JetPoint> = if cfg.points.is_empty() {
        vec![JetPoint::new(0.0, vec![0.0; n], vec![1.0; n])]
    } else {
        cfg.points.iter().map(JetPoint::from).collect()
    };
    let mut report = Report::new(meta("eval", cfg));
    for (idx, p) in points.iter().enumerate() {
        match point_payload(&geo, p) {
            Ok(v) => report.points.push(v),
            Err(e) => {
                report.points.push(json!({ "t": p.t, "x": p.x, "y": p.y, "error": e.to_string() }));
                report.errors.push(ErrorRecord::from_geometry(&e).at_point(idx));
            }
        }
    }
    Ok(report)
}

/// Runs every invariant suite over `verify.samples` seeded random points.
pub fn run_verify(cfg: &RunConfig) -> Result<Report, CliError> {
    let geo = cfg.geometry()?;
    let table = verify::resolve_tolerances(&cfg.verify.tolerances)?;
    let points = Sampler::new(geo.n(), cfg.verify.seed).points(cfg.verify.samples);
    let (checks, errors) = verify::run_checks(&geo, &points, &table);
    let mut report = Report::new(meta("verify", cfg));
    report.checks = checks;
    report.errors = errors;
    Ok(report)
}

/// Integrates the configured problem. A domain exit keeps the partial
/// trajectory and records an error.
pub fn run_geodesic(cfg: &RunConfig) -> Result<Report, CliError> {
    let prob = cfg.geodesic_problem()?;
    let mut report = Report::new(meta("geodesic", cfg));
    match integrate(&prob) {
        Ok(traj) => {
            let residual = match el_residual(&prob, &traj) {
                Ok(r) => Some(r),
                Err(GeodesicError::TooFewSamples(_)) => None,
                Err(e) => return Err(e.into()),
            };
            report.set_trajectory(&traj);
            report.geodesic = Some(GeodesicSummary {
                step: traj.step,
                samples: traj.samples.len(),
                completed: true,
                el_residual: residual,
            });
        }
        Err(GeodesicError::DomainExit { t, partial }) => {
            report.set_trajectory(&partial);
            report.geodesic = Some(GeodesicSummary {
                step: partial.step,
                samples: partial.samples.len(),
                completed: false,
                el_residual: None,
            });
            let err = GeodesicError::DomainExit { t, partial };
            report.errors.push(ErrorRecord {
                kind: "domain-exit".into(),
                message: err.to_string(),
                which: None,
                offset: None,
                point: None,
            });
        }
        Err(e) => return Err(e.into()),
    }
    Ok(report)
}

#[derive(Debug, Parser)]
#[command(name = "bmjet", version, about = "Deformed Berwald-Moór geometry on the 1-jet space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the report here instead of the configured output or stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides verify.seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides verify.samples.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Evaluate every object at the configured points.
    Eval,
    /// Run the invariant suites over seeded random points.
    Verify,
    /// Integrate the configured geodesic problem.
    Geodesic,
}

impl Cli {
    pub fn load_config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.verify.seed = seed;
        }
        if let Some(samples) = self.samples {
            cfg.verify.samples = samples;
        }
        if let Some(out) = &self.out {
            cfg.output = Some(out.clone());
        }
        Ok(cfg)
    }

    /// Runs the selected command, writes the report (or a structured error
    /// on stderr) and returns the process exit status.
    pub fn run(&self) -> i32 {
        let result = self.load_config().and_then(|cfg| {
            let report = match self.command {
                Command::Eval => run_eval(&cfg),
                Command::Verify => run_verify(&cfg),
                Command::Geodesic => run_geodesic(&cfg),
            }?;
            Ok((cfg, report))
        });
        match result {
            Ok((cfg, report)) => {
                let text = report.to_json();
                match &cfg.output {
                    Some(path) => {
                        if let Err(e) = std::fs::write(path, &text) {
                            let err = CliError::Io {
                                path: path.clone(),
                                message: e.to_string(),
                            };
                            emit_error(&err);
                            return err.exit_code();
                        }
                    }
                    None => print!("{text}"),
                }
                report.exit_code()
            }
            Err(e) => {
                emit_error(&e);
                e.exit_code()
            }
        }
    }
}

fn emit_error(e: &CliError) {
    let record = ErrorRecord::from_cli(e);
    eprintln!("{}", json!({ "error": record }));
}
