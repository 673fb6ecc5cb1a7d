//! Invariant suites evaluated over seeded random points.
//!
//! Each check reduces to one deviation per point; the report keeps the
//! maximum over all points. Deviations of tensor comparisons are scaled,
//! `max |a − b| / max(1, max |b|)`, unless noted otherwise in the table.

use std::collections::BTreeMap;

use ndarray::{Array2, Array4};
use rayon::prelude::*;

use crate::connection::{cartan_at, nonlinear_y_derivative, torsions_at, ConnectionBundle};
use crate::curvature::{
    conservation_residuals_with, covariant_c_at, curvature_at, einstein_at, em_tensor_at, ricci_at,
    scalar_curvature_at, stress_energy_at,
};
use crate::error::Result;
use crate::geometry::{fstar_squared, metric, metric_from_parts, Frame, GeometryConfig, JetPoint};
use crate::oracle::{
    invert, oracle_cartan, oracle_curvatures, oracle_metric, oracle_nonlinear, oracle_spray,
    oracle_temporal, scaled_deviation, tensoriality_residual, JetDiffeo, MetricSource, OracleSchemes,
    OracleTolerances,
};

use super::report::{Check, ErrorRecord};
use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckDef {
    pub name: &'static str,
    pub anchor: &'static str,
    pub tol: f64,
}

const fn def(name: &'static str, anchor: &'static str, tol: f64) -> CheckDef {
    CheckDef { name, anchor, tol }
}

/// Every check `verify` runs, in report order, with default tolerances.
pub fn check_table() -> Vec<CheckDef> {
    let o = OracleTolerances::default();
    vec![
        // metric
        def("metric-inverse", "metric-inverse-product", 1e-10),
        def("metric-euler", "metric-euler-contraction", 1e-10),
        def("metric-homogeneity", "metric-zero-homogeneity", 1e-12),
        def("metric-symmetry", "fundamental-metrical-d-tensor", 0.0),
        // connection
        def("cartan-c-identities", "cartan-c-properties", 1e-10),
        def("torsion-antisymmetry", "torsion-r-antisymmetry", 0.0),
        def("g-j1-zero", "cartan-g-j1-vanishes", 0.0),
        def("p-nonlinear-zero", "nonlinear-y-derivative-minus-l", 1e-12),
        // curvature
        def("ricci-contraction", "ricci-contraction", 1e-9),
        def("ricci-zero-diagonal", "ricci-r-diagonal", 1e-10),
        def("scalar-curvature-contraction", "scalar-curvature-contraction", 1e-9),
        def("p-curvature-path", "p-curvature-covariant-c", 1e-12),
        def("einstein-tt-identity", "einstein-tt-scalar-curvature", 1e-10),
        def("einstein-zero-blocks", "einstein-zero-blocks", 0.0),
        def("stress-energy-zero-components", "stress-energy-mixed-zeros", 0.0),
        def("stress-energy-vertical-display", "stress-energy-vertical-mixed", 1e-10),
        def("em-nullity", "electromagnetic-nullity", 1e-10),
        // oracle equivalence
        def("oracle-metric", "oracle-metric-hessian", o.metric),
        def("oracle-metric-inverse", "oracle-metric-inverse", o.metric),
        def("oracle-temporal-spray", "oracle-temporal-spray", o.temporal),
        def("oracle-spray", "oracle-spray-euler-lagrange", o.spray),
        def("oracle-nonlinear", "oracle-nonlinear-y-derivative", o.nonlinear),
        def("oracle-cartan-l", "oracle-cartan-l-adapted", o.cartan_l),
        def("oracle-cartan-c", "oracle-cartan-c-vertical", o.cartan_c),
        def("oracle-g-j1", "oracle-g-j1-temporal", o.g_j1),
        def("oracle-torsion-r", "oracle-torsion-r", o.torsion),
        def("oracle-torsion-p", "oracle-torsion-p", o.torsion),
        def("oracle-curvature-r", "oracle-curvature-r", o.curvature),
        def("oracle-curvature-p", "oracle-curvature-p", o.curvature),
        def("oracle-curvature-s", "oracle-curvature-s", o.curvature),
        def("oracle-ricci", "oracle-ricci-pair", o.ricci),
        def("oracle-scalar-curvature", "oracle-scalar-curvature", o.scalar),
        // conservation (absolute residuals)
        def("conservation-first", "conservation-law-first", o.conservation),
        def("conservation-second", "conservation-law-second", o.conservation),
        def("conservation-third", "conservation-law-third", o.conservation),
        // tensoriality
        def("tensoriality", "jet-coordinate-change", o.tensoriality),
    ]
}

/// Diagonal maps exercised by the tensoriality check: `a ∈ {(2,1,1), (1,3,2)}`
/// padded with ones or truncated to `n`, and `c ∈ {1, 2}`.
pub fn tensoriality_maps(n: usize) -> Vec<JetDiffeo> {
    let fit = |a: &[f64]| -> Vec<f64> { (0..n).map(|i| a.get(i).copied().unwrap_or(1.0)).collect() };
    let mut maps = Vec::new();
    for a in [[2.0, 1.0, 1.0], [1.0, 3.0, 2.0]] {
        for c in [1.0, 2.0] {
            maps.push(JetDiffeo::new(c, 0.0, fit(&a)).expect("nonzero scales"));
        }
    }
    maps
}

fn max_abs<'a>(it: impl IntoIterator<Item = &'a f64>) -> f64 {
    it.into_iter().fold(0.0f64, |m, v| if v.is_nan() { f64::INFINITY } else { m.max(v.abs()) })
}

fn scaled_scalar(a: f64, b: f64) -> f64 {
    scaled_deviation(&[a], &[b])
}

/// `C^{l(1)}_{i(k)|j}` rearranged to the curvature layout `[l][i][j][k]`.
fn covariant_c_as_curvature(cov: &Array4<f64>) -> Array4<f64> {
    let n = cov.shape()[0];
    Array4::from_shape_fn((n, n, n, n), |(l, i, j, k)| cov[[l, i, k, j]])
}

fn c_identities(f: &Frame, b: &ConnectionBundle) -> f64 {
    let n = f.n;
    let c = &b.c;
    let scale = c.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let cov = covariant_c_at(f, b);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let y_contraction: f64 = (0..n).map(|m| c[[i, j, m]] * f.y[m]).sum();
            let trace: f64 = (0..n).map(|m| c[[m, j, m]]).sum();
            worst = worst.max(y_contraction.abs()).max(trace.abs());
            for k in 0..n {
                worst = worst.max((c[[i, j, k]] - c[[i, k, j]]).abs());
                let cov_trace: f64 = (0..n).map(|m| cov[[m, i, k, m]]).sum();
                worst = worst.max(cov_trace.abs());
            }
        }
    }
    worst / scale
}

fn closed_form_checks(cfg: &GeometryConfig, p: &JetPoint, out: &mut BTreeMap<&'static str, f64>) -> Result<()> {
    let n = cfg.n();
    let f = Frame::new(cfg, p)?;
    let m = &f.metric;
    let b = cartan_at(&f);

    let prod = m.g.dot(&m.g_inv);
    out.insert("metric-inverse", max_abs(&(prod - Array2::<f64>::eye(n))));
    let quad: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| m.g[[i, j]] * p.y[i] * p.y[j])
        .sum();
    out.insert("metric-euler", scaled_scalar(quad, f.temporal.h11 * fstar_squared(cfg, p)?));
    let hom = [0.5, 2.0, 10.0]
        .iter()
        .map(|lam| {
            let ly: Vec<f64> = p.y.iter().map(|v| lam * v).collect();
            scaled_deviation(&metric_from_parts(n, f.sigma, f.temporal.h11, &ly).g, &m.g)
        })
        .fold(0.0, f64::max);
    out.insert("metric-homogeneity", hom);
    out.insert("metric-symmetry", max_abs(&(&m.g - &m.g.t())));

    out.insert("cartan-c-identities", c_identities(&f, &b));
    let tors = torsions_at(&f);
    let anti = ndarray::Array3::from_shape_fn(tors.r.raw_dim(), |(r, i, j)| tors.r[[r, i, j]] + tors.r[[r, j, i]]);
    out.insert("torsion-antisymmetry", max_abs(&anti));
    out.insert("g-j1-zero", max_abs(&b.g_j1));
    let p_nl = nonlinear_y_derivative(&f) - &b.l;
    out.insert("p-nonlinear-zero", max_abs(&p_nl) / max_abs(&b.l).max(1.0));

    let cb = curvature_at(&f);
    let (rr, rs) = ricci_at(&f);
    let contr_r = Array2::from_shape_fn((n, n), |(i, j)| (0..n).map(|q| cb.r_curv[[q, i, j, q]]).sum());
    let contr_s = Array2::from_shape_fn((n, n), |(i, j)| (0..n).map(|q| cb.s_curv[[q, i, j, q]]).sum());
    out.insert(
        "ricci-contraction",
        scaled_deviation(&contr_r, &rr).max(scaled_deviation(&contr_s, &rs)),
    );
    let diag = (0..n).map(|i| rr[[i, i]].abs()).fold(0.0, f64::max);
    out.insert("ricci-zero-diagonal", diag / max_abs(&rr).max(1.0));
    let (sc, _) = scalar_curvature_at(&f);
    let h11 = f.temporal.h11;
    let contracted = (&m.g_inv * &rr).sum() + h11 * (&m.g_inv * &rs).sum();
    out.insert("scalar-curvature-contraction", scaled_scalar(contracted, sc));
    let cov = covariant_c_as_curvature(&covariant_c_at(&f, &b));
    out.insert("p-curvature-path", scaled_deviation(&cb.p_curv, &(-cov)));

    let e = einstein_at(&f);
    out.insert("einstein-tt-identity", scaled_scalar(e.tt, -0.5 * sc * h11));
    out.insert("einstein-zero-blocks", e.zero.iter().map(|z| max_abs(&z.values)).fold(0.0, f64::max));
    let se = stress_energy_at(&f, cfg.einstein_k());
    let zeros = [
        max_abs(&se.t_up_m_down1),
        max_abs(&se.t_vert_m_down1),
        max_abs(&se.t_up1_down_i),
        max_abs(&se.t_vert_m_down_i),
        max_abs(&se.t_up1_vert_i),
        max_abs(&se.t_up_m_vert_i),
        se.zero_blocks.iter().map(|z| max_abs(&z.values)).fold(0.0, f64::max),
    ];
    out.insert("stress-energy-zero-components", zeros.into_iter().fold(0.0, f64::max));
    let raised = Array2::from_shape_fn((n, n), |(mi, i)| {
        (0..n).map(|r| h11 * m.g_inv[[mi, r]] * se.t_vv[[r, i]]).sum::<f64>()
    });
    out.insert("stress-energy-vertical-display", scaled_deviation(&se.t_vert_vert, &raised));
    out.insert("em-nullity", max_abs(&em_tensor_at(&f)));
    Ok(())
}

fn oracle_checks(
    cfg: &GeometryConfig,
    p: &JetPoint,
    s: &OracleSchemes,
    out: &mut BTreeMap<&'static str, f64>,
) -> Result<()> {
    let f = Frame::new(cfg, p)?;
    let b = cartan_at(&f);
    let fl = &s.first_level;

    let og = oracle_metric(cfg, p, fl)?;
    out.insert("oracle-metric", scaled_deviation(&og, &f.metric.g));
    out.insert("oracle-metric-inverse", scaled_deviation(&f.metric.g_inv, &invert(&og)?));
    let (h, m) = oracle_temporal(cfg, p, fl)?;
    out.insert(
        "oracle-temporal-spray",
        scaled_deviation(&h, &b.h).max(scaled_deviation(&m, &b.m)),
    );
    out.insert("oracle-spray", scaled_deviation(&oracle_spray(cfg, p, fl)?, &b.gs));
    out.insert("oracle-nonlinear", scaled_deviation(&oracle_nonlinear(cfg, p, &s.second_level)?, &b.n));
    let oc = oracle_cartan(cfg, p, fl, MetricSource::ClosedForm)?;
    out.insert("oracle-cartan-l", scaled_deviation(&oc.l, &b.l));
    out.insert("oracle-cartan-c", scaled_deviation(&oc.c, &b.c));
    out.insert("oracle-g-j1", max_abs(&oc.g_j1) / max_abs(&b.c).max(1.0));
    let tors = torsions_at(&f);
    let ocv = oracle_curvatures(cfg, p, fl)?;
    out.insert("oracle-torsion-r", scaled_deviation(&ocv.torsion_r, &tors.r));
    out.insert("oracle-torsion-p", scaled_deviation(&oc.c, &tors.p));
    let cb = curvature_at(&f);
    out.insert("oracle-curvature-r", scaled_deviation(&ocv.r_curv, &cb.r_curv));
    out.insert("oracle-curvature-p", scaled_deviation(&ocv.p_curv, &cb.p_curv));
    out.insert("oracle-curvature-s", scaled_deviation(&ocv.s_curv, &cb.s_curv));
    out.insert(
        "oracle-ricci",
        scaled_deviation(&ocv.ricci_r, &cb.ricci_r).max(scaled_deviation(&ocv.ricci_s, &cb.ricci_s)),
    );
    out.insert("oracle-scalar-curvature", scaled_scalar(ocv.scalar_curvature, cb.scalar_curvature));

    let cr = conservation_residuals_with(cfg, p, &s.conservation)?;
    out.insert("conservation-first", cr.first);
    out.insert("conservation-second", cr.second);
    out.insert("conservation-third", cr.third);

    let mut tens = 0.0f64;
    for d in tensoriality_maps(cfg.n()) {
        tens = tens.max(tensoriality_residual(cfg, &d, p, fl)?);
    }
    out.insert("tensoriality", tens);
    Ok(())
}

/// Deviations of every check at one point, keyed by check name.
pub fn point_deviations(cfg: &GeometryConfig, p: &JetPoint, s: &OracleSchemes) -> Result<BTreeMap<&'static str, f64>> {
    metric(cfg, p)?;
    let mut out = BTreeMap::new();
    closed_form_checks(cfg, p, &mut out)?;
    oracle_checks(cfg, p, s, &mut out)?;
    Ok(out)
}

/// Resolved tolerances: defaults overridden by `overrides`. Unknown names
/// are configuration errors.
pub fn resolve_tolerances(overrides: &BTreeMap<String, f64>) -> Result<Vec<CheckDef>, CliError> {
    let mut table = check_table();
    for (name, tol) in overrides {
        let entry = table
            .iter_mut()
            .find(|d| d.name == name)
            .ok_or_else(|| CliError::UnknownCheck(name.clone()))?;
        if !(tol.is_finite() && *tol >= 0.0) {
            return Err(CliError::Config(format!("tolerance for `{name}` must be a non-negative number")));
        }
        entry.tol = *tol;
    }
    Ok(table)
}

/// Runs every suite over `points` in parallel and reduces in point order.
/// Points at which evaluation fails are returned as error records.
pub fn run_checks(cfg: &GeometryConfig, points: &[JetPoint], table: &[CheckDef]) -> (Vec<Check>, Vec<ErrorRecord>) {
    let schemes = OracleSchemes::default();
    let results: Vec<_> = points
        .par_iter()
        .map(|p| point_deviations(cfg, p, &schemes))
        .collect();
    let mut worst = vec![0.0f64; table.len()];
    let mut errors = Vec::new();
    for (idx, r) in results.into_iter().enumerate() {
        match r {
            Ok(devs) => {
                for (w, d) in worst.iter_mut().zip(table) {
                    let v = devs[d.name];
                    *w = if v.is_nan() { f64::INFINITY } else { w.max(v) };
                }
            }
            Err(e) => errors.push(ErrorRecord::from_geometry(&e).at_point(idx)),
        }
    }
    let checks = table
        .iter()
        .zip(worst)
        .map(|(d, max_dev)| Check {
            name: d.name.into(),
            anchor: d.anchor.into(),
            max_dev,
            tol: d.tol,
            pass: max_dev <= d.tol,
        })
        .collect();
    (checks, errors)
}
