//! Diagonal affine jet coordinate changes and the tensoriality check of `g`.

use crate::error::{GeometryError, Result};
use crate::geometry::{GeometryConfig, JetPoint};

use super::{oracle_metric, scaled_deviation, DiffScheme};

/// `t̃ = c·t + d₀`, `x̃ⁱ = aᵢ xⁱ`.
#[derive(Debug, Clone, PartialEq)]
pub struct JetDiffeo {
    pub c: f64,
    pub d0: f64,
    pub a: Vec<f64>,
}

impl JetDiffeo {
    pub fn new(c: f64, d0: f64, a: Vec<f64>) -> Result<Self> {
        if c == 0.0 || !c.is_finite() {
            return Err(GeometryError::Transform(format!("time scale {c} is not invertible")));
        }
        if let Some(ai) = a.iter().find(|ai| **ai == 0.0 || !ai.is_finite()) {
            return Err(GeometryError::Transform(format!("space scale {ai} is not invertible")));
        }
        Ok(Self { c, d0, a })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            c: 1.0,
            d0: 0.0,
            a: vec![1.0; n],
        }
    }
}

/// `(t̃, x̃, ỹ) = (c·t + d₀, aᵢxⁱ, (aᵢ/c) yⁱ)`.
pub fn transform_point(p: &JetPoint, d: &JetDiffeo) -> JetPoint {
    JetPoint::new(
        d.c * p.t + d.d0,
        p.x.iter().zip(&d.a).map(|(x, a)| a * x).collect(),
        p.y.iter().zip(&d.a).map(|(y, a)| a / d.c * y).collect(),
    )
}

/// The geometry written in tilde coordinates.
///
/// `h̃₁₁(t̃) = h₁₁((t̃ − d₀)/c)/c²` and
/// `σ̃(x̃) = σ(x̃/a) − (1/n) ln|a₁⋯aₙ|`. The constant shift absorbs the
/// Jacobian factor of `(y¹⋯yⁿ)^{1/n}`, which is not itself invariant
/// under rescaling of the individual velocity components; without it `F*`
/// would change by `|a₁⋯aₙ|^{1/n}`.
///
/// Fails when `a₁⋯aₙ / cⁿ < 0`, since the image of the domain would then
/// have a negative product of velocities.
pub fn tilde_config(cfg: &GeometryConfig, d: &JetDiffeo) -> Result<GeometryConfig> {
    let n = cfg.n();
    if d.a.len() != n {
        return Err(GeometryError::Shape {
            what: "space scales",
            expected: n,
            got: d.a.len(),
        });
    }
    let prod: f64 = d.a.iter().product();
    if prod / d.c.powi(n as i32) <= 0.0 {
        return Err(GeometryError::Transform(format!(
            "a₁⋯aₙ/cⁿ = {} maps the domain outside itself",
            prod / d.c.powi(n as i32)
        )));
    }
    let inv_a: Vec<f64> = d.a.iter().map(|a| 1.0 / a).collect();
    let sigma = cfg
        .sigma()
        .substitute_affine(&inv_a, &vec![0.0; n])
        .shifted(-prod.abs().ln() / n as f64);
    let h11 = cfg
        .h11()
        .substitute_affine(&[1.0 / d.c], &[-d.d0 / d.c])
        .scaled(1.0 / (d.c * d.c));
    GeometryConfig::from_expressions(n, sigma, h11, cfg.einstein_k())
}

/// Scaled deviation between `oracle_metric` at `p` and the pullback
/// `aᵢaⱼ g̃ᵢⱼ(p̃)` of the oracle metric computed in tilde coordinates.
pub fn tensoriality_residual(
    cfg: &GeometryConfig,
    d: &JetDiffeo,
    p: &JetPoint,
    scheme: &DiffScheme,
) -> Result<f64> {
    let tilde = tilde_config(cfg, d)?;
    let pt = transform_point(p, d);
    let gt = oracle_metric(&tilde, &pt, scheme)?;
    let g = oracle_metric(cfg, p, scheme)?;
    let pulled = ndarray::Array2::from_shape_fn(g.raw_dim(), |(i, j)| d.a[i] * d.a[j] * gt[[i, j]]);
    Ok(scaled_deviation(&pulled, &g))
}
