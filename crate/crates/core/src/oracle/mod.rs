//! Definitional evaluation of every geometric object by numerical
//! differentiation.
//!
//! Nothing here uses the simplified closed forms for the quantity being
//! checked: the metric is the y-Hessian of `F*²`, the spray is the
//! bracketed Euler-Lagrange expression, the connection coefficients are
//! Christoffel-type contractions of adapted derivatives of `g`, and the
//! curvatures are their definitional displays. Algebraic ingredients that
//! are not themselves under test (for instance `N` inside the adapted
//! derivatives) are taken in closed form.

pub mod diff;
pub mod transform;

use nalgebra::DMatrix;
use ndarray::{Array2, Array3, Array4};

use crate::connection::{cartan, nonlinear_connection};
use crate::error::{GeometryError, Result};
use crate::geometry::{fstar_squared, metric, GeometryConfig, JetPoint};

pub use diff::{Coord, DiffScheme};
pub use transform::{tensoriality_residual, transform_point, tilde_config, JetDiffeo};

/// Agreement thresholds between closed forms and oracle values.
///
/// All are scaled: a deviation `|a − b|` is divided by
/// `max(1, max |b|)` over the compared object before comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleTolerances {
    pub metric: f64,
    pub temporal: f64,
    pub spray: f64,
    pub nonlinear: f64,
    pub cartan_l: f64,
    pub cartan_c: f64,
    pub g_j1: f64,
    pub torsion: f64,
    pub curvature: f64,
    pub ricci: f64,
    pub scalar: f64,
    pub tensoriality: f64,
    pub conservation: f64,
}

impl Default for OracleTolerances {
    fn default() -> Self {
        Self {
            metric: 1e-5,
            temporal: 1e-5,
            spray: 1e-4,
            nonlinear: 1e-3,
            cartan_l: 1e-5,
            cartan_c: 1e-5,
            g_j1: 1e-6,
            torsion: 1e-5,
            curvature: 1e-5,
            ricci: 1e-5,
            scalar: 1e-5,
            tensoriality: 1e-4,
            conservation: 1e-5,
        }
    }
}

/// Difference schemes used by the verification suites.
///
/// `first_level` serves oracles that differentiate closed-form or
/// elementary fields once or twice. `second_level` is for
/// [`oracle_nonlinear`], which differentiates a finite-difference result:
/// larger steps with Richardson extrapolation keep the nested rounding
/// error below the truncation error. `conservation` differentiates the
/// stress-energy fields, whose magnitude can reach 10⁴ on the sampling box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSchemes {
    pub first_level: DiffScheme,
    pub second_level: DiffScheme,
    pub conservation: DiffScheme,
}

impl Default for OracleSchemes {
    fn default() -> Self {
        Self {
            first_level: DiffScheme::default().with_richardson(true),
            second_level: DiffScheme::default().with_steps(3e-4, 3e-3).with_richardson(true),
            conservation: DiffScheme::default().with_steps(1e-4, 1e-4).with_richardson(true),
        }
    }
}

pub(crate) fn invert(m: &Array2<f64>) -> Result<Array2<f64>> {
    let n = m.nrows();
    let dm = DMatrix::from_fn(n, n, |i, j| m[[i, j]]);
    let inv = dm.try_inverse().ok_or(GeometryError::Singular)?;
    Ok(Array2::from_shape_fn((n, n), |(i, j)| inv[(i, j)]))
}

fn fsq(cfg: &GeometryConfig) -> impl Fn(&JetPoint) -> Result<Vec<f64>> + '_ {
    move |q| Ok(vec![fstar_squared(cfg, q)?])
}

fn flat2(n: usize, v: Vec<f64>) -> Array2<f64> {
    Array2::from_shape_vec((n, n), v).expect("n*n entries")
}

/// `κ = (h^{11}/2) dh₁₁/dt` with the derivative taken numerically.
pub fn oracle_kappa(cfg: &GeometryConfig, t: f64, scheme: &DiffScheme) -> Result<f64> {
    let h11 = cfg.h11_value(t)?;
    let d = diff::derivative_1d(scheme, t, |s| cfg.h11_value(s))?;
    Ok(0.5 * d / h11)
}

/// `H^{(i)} = −κyⁱ/2` and `M^{(i)} = 2H^{(i)}` with `κ` from [`oracle_kappa`].
pub fn oracle_temporal(cfg: &GeometryConfig, p: &JetPoint, scheme: &DiffScheme) -> Result<(Vec<f64>, Vec<f64>)> {
    p.validate(cfg.n())?;
    let kappa = oracle_kappa(cfg, p.t, scheme)?;
    let h: Vec<f64> = p.y.iter().map(|y| -0.5 * kappa * y).collect();
    let m = h.iter().map(|v| 2.0 * v).collect();
    Ok((h, m))
}

/// `g_ij = (h₁₁/2) ∂²F*²/∂yⁱ∂y^j`.
pub fn oracle_metric(cfg: &GeometryConfig, p: &JetPoint, scheme: &DiffScheme) -> Result<Array2<f64>> {
    p.validate(cfg.n())?;
    let n = cfg.n();
    let h11 = cfg.h11_value(p.t)?;
    let f = fsq(cfg);
    let mut g = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let d = diff::second_partial(scheme, p, Coord::Y(i), Coord::Y(j), &f)?[0];
            g[[i, j]] = 0.5 * h11 * d;
            g[[j, i]] = g[[i, j]];
        }
    }
    Ok(g)
}

/// `G^{(i)} = (h₁₁ g^{ip}/4)[∂²F*²/∂x^r∂y^p y^r − ∂F*²/∂x^p + ∂²F*²/∂t∂y^p
///            + ∂F*²/∂y^p κ + 2h^{11}κ g_pr y^r]`.
pub fn oracle_spray(cfg: &GeometryConfig, p: &JetPoint, scheme: &DiffScheme) -> Result<Vec<f64>> {
    let n = cfg.n();
    let g = oracle_metric(cfg, p, scheme)?;
    let g_inv = invert(&g)?;
    let h11 = cfg.h11_value(p.t)?;
    let kappa = oracle_kappa(cfg, p.t, scheme)?;
    let f = fsq(cfg);
    let mut bracket = vec![0.0; n];
    for (pi, b) in bracket.iter_mut().enumerate() {
        let mut v = -diff::partial(scheme, p, Coord::X(pi), &f)?[0];
        v += diff::second_partial(scheme, p, Coord::T, Coord::Y(pi), &f)?[0];
        v += kappa * diff::partial(scheme, p, Coord::Y(pi), &f)?[0];
        for r in 0..n {
            v += diff::second_partial(scheme, p, Coord::X(r), Coord::Y(pi), &f)?[0] * p.y[r];
            v += 2.0 / h11 * kappa * g[[pi, r]] * p.y[r];
        }
        *b = v;
    }
    Ok((0..n)
        .map(|i| 0.25 * h11 * (0..n).map(|q| g_inv[[i, q]] * bracket[q]).sum::<f64>())
        .collect())
}

/// `N^{(i)}_{(1)j} = ∂G^{(i)}/∂y^j` of [`oracle_spray`], stored `[i][j]`.
pub fn oracle_nonlinear(cfg: &GeometryConfig, p: &JetPoint, scheme: &DiffScheme) -> Result<Array2<f64>> {
    let n = cfg.n();
    let nested = scheme.nested();
    let mut out = Array2::zeros((n, n));
    for j in 0..n {
        let col = diff::partial(&nested, p, Coord::Y(j), |q| oracle_spray(cfg, q, scheme))?;
        for i in 0..n {
            out[[i, j]] = col[i];
        }
    }
    Ok(out)
}

/// Where [`oracle_cartan`] takes `g` from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MetricSource {
    /// The closed-form fundamental d-tensor.
    #[default]
    ClosedForm,
    /// [`oracle_metric`], itself a finite-difference result.
    Oracle,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCartan {
    /// `[i][j][k]`
    pub l: Array3<f64>,
    /// `[i][j][k]`
    pub c: Array3<f64>,
    /// `G^k_{j1}`, `[k][j]`
    pub g_j1: Array2<f64>,
}

/// Christoffel-type contractions of adapted derivatives of `g`:
///
/// ```text
/// L^i_jk = (g^{im}/2)(δg_jm/δx^k + δg_km/δx^j − δg_jk/δx^m)
/// C^i_jk = (g^{im}/2)(∂g_jm/∂y^k + ∂g_km/∂y^j − ∂g_jk/∂y^m)
/// G^k_j1 = (g^{km}/2) δg_mj/δt
/// ```
pub fn oracle_cartan(
    cfg: &GeometryConfig,
    p: &JetPoint,
    scheme: &DiffScheme,
    source: MetricSource,
) -> Result<OracleCartan> {
    let n = cfg.n();
    let gfun = |q: &JetPoint| -> Result<Vec<f64>> {
        Ok(match source {
            MetricSource::ClosedForm => metric(cfg, q)?.g.into_raw_vec_and_offset().0,
            MetricSource::Oracle => oracle_metric(cfg, q, scheme)?.into_raw_vec_and_offset().0,
        })
    };
    let dscheme = match source {
        MetricSource::ClosedForm => *scheme,
        MetricSource::Oracle => scheme.nested(),
    };
    let g = flat2(n, gfun(p)?);
    let g_inv = invert(&g)?;
    let nl = nonlinear_connection(cfg, p)?.n;
    let kappa = oracle_kappa(cfg, p.t, scheme)?;

    let dx: Vec<Array2<f64>> = (0..n)
        .map(|k| diff::partial(&dscheme, p, Coord::X(k), gfun).map(|v| flat2(n, v)))
        .collect::<Result<_>>()?;
    let dy: Vec<Array2<f64>> = (0..n)
        .map(|k| diff::partial(&dscheme, p, Coord::Y(k), gfun).map(|v| flat2(n, v)))
        .collect::<Result<_>>()?;
    let dt = flat2(n, diff::partial(&dscheme, p, Coord::T, gfun)?);

    // δg/δx^k
    let adapted: Vec<Array2<f64>> = (0..n)
        .map(|k| {
            let mut a = dx[k].clone();
            for q in 0..n {
                a.scaled_add(-nl[[q, k]], &dy[q]);
            }
            a
        })
        .collect();
    let mut delta_t = dt;
    for q in 0..n {
        delta_t.scaled_add(kappa * p.y[q], &dy[q]);
    }

    let l = Array3::from_shape_fn((n, n, n), |(i, j, k)| {
        (0..n)
            .map(|m| {
                0.5 * g_inv[[i, m]] * (adapted[k][[j, m]] + adapted[j][[k, m]] - adapted[m][[j, k]])
            })
            .sum()
    });
    let c = Array3::from_shape_fn((n, n, n), |(i, j, k)| {
        (0..n)
            .map(|m| 0.5 * g_inv[[i, m]] * (dy[k][[j, m]] + dy[j][[k, m]] - dy[m][[j, k]]))
            .sum()
    });
    let g_j1 = Array2::from_shape_fn((n, n), |(k, j)| {
        (0..n).map(|m| 0.5 * g_inv[[k, m]] * delta_t[[m, j]]).sum()
    });
    Ok(OracleCartan { l, c, g_j1 })
}

/// Torsions, curvatures and their contractions from the definitional
/// displays, differentiating the closed-form `N`, `L` and `C` fields.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCurvatures {
    /// `R^{(r)}_{(1)ij}`, `[r][i][j]`
    pub torsion_r: Array3<f64>,
    /// `P^{(r)(1)}_{(1)j(k)} = ∂N^{(r)}_j/∂y^k − L^r_jk`, `[r][j][k]`
    pub p_nonlinear: Array3<f64>,
    /// `C^{l(1)}_{i(k)|j}`, `[l][i][k][j]`
    pub covariant_c: Array4<f64>,
    pub r_curv: Array4<f64>,
    pub p_curv: Array4<f64>,
    pub s_curv: Array4<f64>,
    pub ricci_r: Array2<f64>,
    pub ricci_s: Array2<f64>,
    pub scalar_curvature: f64,
}

fn field_partials<F>(scheme: &DiffScheme, p: &JetPoint, f: F) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)>
where
    F: Fn(&JetPoint) -> Result<Vec<f64>>,
{
    let n = p.x.len();
    let dx = (0..n)
        .map(|k| diff::partial(scheme, p, Coord::X(k), &f))
        .collect::<Result<Vec<_>>>()?;
    let dy = (0..n)
        .map(|k| diff::partial(scheme, p, Coord::Y(k), &f))
        .collect::<Result<Vec<_>>>()?;
    Ok((dx, dy))
}

/// `δF/δx^k = ∂F/∂x^k − N^{(q)}_{(1)k} ∂F/∂y^q` for a flattened field.
fn adapted_x(dx: &[Vec<f64>], dy: &[Vec<f64>], nl: &Array2<f64>) -> Vec<Vec<f64>> {
    let n = dx.len();
    (0..n)
        .map(|k| {
            let mut out = dx[k].clone();
            for q in 0..n {
                let w = nl[[q, k]];
                for (o, d) in out.iter_mut().zip(&dy[q]) {
                    *o -= w * d;
                }
            }
            out
        })
        .collect()
}

pub fn oracle_curvatures(cfg: &GeometryConfig, p: &JetPoint, scheme: &DiffScheme) -> Result<OracleCurvatures> {
    let n = cfg.n();
    let b = cartan(cfg, p)?;
    let (l, c, nl) = (&b.l, &b.c, &b.n);
    let i2 = |a: usize, b: usize| a * n + b;
    let i3 = |a: usize, b: usize, c: usize| (a * n + b) * n + c;

    let (dnx, dny) = field_partials(scheme, p, |q| {
        Ok(nonlinear_connection(cfg, q)?.n.into_raw_vec_and_offset().0)
    })?;
    let (dlx, dly) = field_partials(scheme, p, |q| Ok(cartan(cfg, q)?.l.into_raw_vec_and_offset().0))?;
    let (dcx, dcy) = field_partials(scheme, p, |q| Ok(cartan(cfg, q)?.c.into_raw_vec_and_offset().0))?;
    let delta_n = adapted_x(&dnx, &dny, nl);
    let delta_l = adapted_x(&dlx, &dly, nl);
    let delta_c = adapted_x(&dcx, &dcy, nl);

    let torsion_r = Array3::from_shape_fn((n, n, n), |(r, i, j)| {
        delta_n[j][i2(r, i)] - delta_n[i][i2(r, j)]
    });
    let p_nonlinear = Array3::from_shape_fn((n, n, n), |(r, j, k)| dny[k][i2(r, j)] - l[[r, j, k]]);
    let covariant_c = Array4::from_shape_fn((n, n, n, n), |(li, i, k, j)| {
        let mut v = delta_c[j][i3(li, i, k)];
        for r in 0..n {
            v += c[[r, i, k]] * l[[li, r, j]] - c[[li, r, k]] * l[[r, i, j]] - c[[li, i, r]] * l[[r, k, j]];
        }
        v
    });
    let r_curv = Array4::from_shape_fn((n, n, n, n), |(li, i, j, k)| {
        let mut v = delta_l[k][i3(li, i, j)] - delta_l[j][i3(li, i, k)];
        for r in 0..n {
            v += l[[r, i, j]] * l[[li, r, k]] - l[[r, i, k]] * l[[li, r, j]];
            v += c[[li, i, r]] * torsion_r[[r, j, k]];
        }
        v
    });
    let p_curv = Array4::from_shape_fn((n, n, n, n), |(li, i, j, k)| {
        let mut v = dly[k][i3(li, i, j)] - covariant_c[[li, i, k, j]];
        for r in 0..n {
            v += c[[li, i, r]] * p_nonlinear[[r, j, k]];
        }
        v
    });
    let s_curv = Array4::from_shape_fn((n, n, n, n), |(li, i, j, k)| {
        let mut v = dcy[k][i3(li, i, j)] - dcy[j][i3(li, i, k)];
        for r in 0..n {
            v += c[[r, i, j]] * c[[li, r, k]] - c[[r, i, k]] * c[[li, r, j]];
        }
        v
    });
    let ricci_r = Array2::from_shape_fn((n, n), |(i, j)| (0..n).map(|m| r_curv[[m, i, j, m]]).sum());
    let ricci_s = Array2::from_shape_fn((n, n), |(i, j)| (0..n).map(|m| s_curv[[m, i, j, m]]).sum());
    let g_inv = invert(&metric(cfg, p)?.g)?;
    let h11 = cfg.h11_value(p.t)?;
    let scalar_curvature = (&g_inv * &ricci_r).sum() + h11 * (&g_inv * &ricci_s).sum();
    Ok(OracleCurvatures {
        torsion_r,
        p_nonlinear,
        covariant_c,
        r_curv,
        p_curv,
        s_curv,
        ricci_r,
        ricci_s,
        scalar_curvature,
    })
}

/// Scaled deviation `max |a − b| / max(1, max |b|)`.
pub fn scaled_deviation<'a>(
    a: impl IntoIterator<Item = &'a f64>,
    b: impl IntoIterator<Item = &'a f64> + Clone,
) -> f64 {
    let scale = b.clone().into_iter().fold(1.0f64, |s, v| s.max(v.abs()));
    let dev = a
        .into_iter()
        .zip(b)
        .fold(0.0f64, |d, (x, y)| if (x - y).is_nan() { f64::INFINITY } else { d.max((x - y).abs()) });
    dev / scale
}
