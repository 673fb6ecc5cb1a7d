//! Points of the 1-jet space and the deformed Berwald-Moór metric
//!
//! ```text
//! F*(t, x, y) = e^{σ(x)} √(h^{11}(t)) (y¹ y² ⋯ yⁿ)^{1/n}
//! ```
//!
//! together with its fundamental d-tensor `g_ij`, the inverse `g^{ij}`, and
//! the temporal Christoffel symbol `κ = (h^{11}/2) dh₁₁/dt`.
//!
//! Index layout used throughout the crate: rank-2 objects are `[row][col]`,
//! rank-3 objects `[upper][lower1][lower2]`, rank-4 objects
//! `[upper][lower1][lower2][lower3]`.

use ndarray::Array2;

use crate::error::{GeometryError, Result};
use crate::expr::{EvalResult, Expression};

/// Dimension, conformal factor `σ(x¹..xⁿ)`, temporal metric `h₁₁(t)` and
/// the Einstein constant.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryConfig {
    n: usize,
    sigma: Expression,
    h11: Expression,
    einstein_k: f64,
}

pub fn spatial_variables(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

impl GeometryConfig {
    pub fn new(n: usize, sigma: &str, h11: &str, einstein_k: f64) -> Result<Self> {
        if n < 2 {
            return Err(GeometryError::Dimension(n));
        }
        let sigma = Expression::parse(sigma, &spatial_variables(n))
            .map_err(|source| GeometryError::Expr { which: "sigma", source })?;
        let h11 = Expression::parse(h11, &["t"])
            .map_err(|source| GeometryError::Expr { which: "h11", source })?;
        Self::from_expressions(n, sigma, h11, einstein_k)
    }

    /// `sigma` must be declared over `x1..xn` and `h11` over `t`.
    pub fn from_expressions(
        n: usize,
        sigma: Expression,
        h11: Expression,
        einstein_k: f64,
    ) -> Result<Self> {
        if n < 2 {
            return Err(GeometryError::Dimension(n));
        }
        if sigma.variables() != spatial_variables(n).as_slice() {
            return Err(GeometryError::Shape {
                what: "sigma variable list",
                expected: n,
                got: sigma.variables().len(),
            });
        }
        if h11.variables() != ["t".to_string()] {
            return Err(GeometryError::Shape {
                what: "h11 variable list",
                expected: 1,
                got: h11.variables().len(),
            });
        }
        if !(einstein_k > 0.0 && einstein_k.is_finite()) {
            return Err(GeometryError::EinsteinConstant(einstein_k));
        }
        Ok(Self {
            n,
            sigma,
            h11,
            einstein_k,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> &Expression {
        &self.sigma
    }

    pub fn h11(&self) -> &Expression {
        &self.h11
    }

    pub fn einstein_k(&self) -> f64 {
        self.einstein_k
    }

    pub fn with_einstein_k(mut self, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(GeometryError::EinsteinConstant(k));
        }
        self.einstein_k = k;
        Ok(self)
    }

    pub fn sigma_value(&self, x: &[f64]) -> Result<f64> {
        self.sigma
            .value(x)
            .map_err(|source| GeometryError::Expr { which: "sigma", source })
    }

    /// `σ`, `σ_i = ∂σ/∂xⁱ` and `σ_pq = ∂²σ/∂xᵖ∂x^q`, exact.
    pub fn sigma_jet(&self, x: &[f64]) -> Result<EvalResult> {
        self.sigma
            .eval_all(x)
            .map_err(|source| GeometryError::Expr { which: "sigma", source })
    }

    pub fn h11_value(&self, t: f64) -> Result<f64> {
        let v = self
            .h11
            .value(&[t])
            .map_err(|source| GeometryError::Expr { which: "h11", source })?;
        if v <= 0.0 {
            return Err(GeometryError::NonPositiveH11 { t, value: v });
        }
        Ok(v)
    }
}

/// A point `(t, x¹..xⁿ, y¹..yⁿ)` of `J¹(ℝ, Mⁿ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl JetPoint {
    pub fn new(t: f64, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { t, x, y }
    }

    /// Checks shape against `n` and the domain `y¹⋯yⁿ > 0`, `yⁱ ≠ 0`.
    pub fn validate(&self, n: usize) -> Result<()> {
        for (what, len) in [("x", self.x.len()), ("y", self.y.len())] {
            if len != n {
                return Err(GeometryError::Shape {
                    what,
                    expected: n,
                    got: len,
                });
            }
        }
        if !self.t.is_finite() || self.x.iter().chain(&self.y).any(|v| !v.is_finite()) {
            return Err(GeometryError::OutOfDomain("non-finite coordinate".into()));
        }
        if let Some(i) = self.y.iter().position(|v| *v == 0.0) {
            return Err(GeometryError::OutOfDomain(format!("y{} = 0", i + 1)));
        }
        let g = product_g(&self.y);
        if !(g > 0.0) {
            return Err(GeometryError::OutOfDomain(format!(
                "y1*...*yn = {g} is not positive"
            )));
        }
        Ok(())
    }
}

/// `h₁₁`, `h^{11}`, `dh₁₁/dt` and `κ¹₁₁` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemporalData {
    pub h11: f64,
    pub h11_inv: f64,
    pub dh11_dt: f64,
    pub kappa: f64,
}

pub fn temporal_data(cfg: &GeometryConfig, t: f64) -> Result<TemporalData> {
    let r = cfg
        .h11
        .eval_all(&[t])
        .map_err(|source| GeometryError::Expr { which: "h11", source })?;
    if r.value <= 0.0 {
        return Err(GeometryError::NonPositiveH11 { t, value: r.value });
    }
    let h11_inv = 1.0 / r.value;
    let dh11_dt = r.gradient[0];
    Ok(TemporalData {
        h11: r.value,
        h11_inv,
        dh11_dt,
        kappa: 0.5 * h11_inv * dh11_dt,
    })
}

/// `G_{1[n]}(y) = y¹y²⋯yⁿ`.
pub fn product_g(y: &[f64]) -> f64 {
    y.iter().product()
}

/// `∂G/∂yⁱ = G/yⁱ`.
pub fn product_g_partial(y: &[f64], i: usize) -> f64 {
    y.iter()
        .enumerate()
        .filter(|(k, _)| *k != i)
        .map(|(_, v)| v)
        .product()
}

/// `G^{2/n}` through `exp((2/n) log G)`; requires `G > 0`.
pub(crate) fn product_pow_2n(g: f64, n: usize) -> f64 {
    ((2.0 / n as f64) * g.ln()).exp()
}

/// `F*²`, the scalar every definitional derivative is taken of.
pub fn fstar_squared(cfg: &GeometryConfig, p: &JetPoint) -> Result<f64> {
    p.validate(cfg.n)?;
    let h11 = cfg.h11_value(p.t)?;
    let sigma = cfg.sigma_value(&p.x)?;
    Ok((2.0 * sigma).exp() / h11 * product_pow_2n(product_g(&p.y), cfg.n))
}

pub fn fstar(cfg: &GeometryConfig, p: &JetPoint) -> Result<f64> {
    p.validate(cfg.n)?;
    let h11 = cfg.h11_value(p.t)?;
    let sigma = cfg.sigma_value(&p.x)?;
    let g = product_g(&p.y);
    Ok(sigma.exp() * (1.0 / h11).sqrt() * ((1.0 / cfg.n as f64) * g.ln()).exp())
}

/// Integrand of the energy functional, `F*² √h₁₁`.
pub fn energy_density(cfg: &GeometryConfig, p: &JetPoint) -> Result<f64> {
    let h11 = cfg.h11_value(p.t)?;
    Ok(fstar_squared(cfg, p)? * h11.sqrt())
}

/// Fundamental metrical d-tensor and its inverse at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialMetric {
    pub g: Array2<f64>,
    pub g_inv: Array2<f64>,
    pub g_product: f64,
    pub fstar: f64,
}

/// `g_ij = (e^{2σ}/n)(2/n − δ_ij) G^{2/n}/(yⁱy^j)` and
/// `g^{jk} = e^{−2σ}(2 − nδ^{jk}) G^{−2/n} y^j y^k`, no summation.
pub fn metric(cfg: &GeometryConfig, p: &JetPoint) -> Result<SpatialMetric> {
    p.validate(cfg.n)?;
    let sigma = cfg.sigma_value(&p.x)?;
    let h11 = cfg.h11_value(p.t)?;
    Ok(metric_from_parts(cfg.n, sigma, h11, &p.y))
}

pub(crate) fn metric_from_parts(n: usize, sigma: f64, h11: f64, y: &[f64]) -> SpatialMetric {
    let nf = n as f64;
    let g_product = product_g(y);
    let g2n = product_pow_2n(g_product, n);
    let e2s = (2.0 * sigma).exp();
    let mut g = Array2::zeros((n, n));
    let mut g_inv = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let d = if i == j { 1.0 } else { 0.0 };
            g[[i, j]] = e2s / nf * (2.0 / nf - d) * g2n / (y[i] * y[j]);
            g_inv[[i, j]] = (2.0 - nf * d) * y[i] * y[j] / (e2s * g2n);
        }
    }
    SpatialMetric {
        g,
        g_inv,
        g_product,
        fstar: (e2s * g2n / h11).sqrt(),
    }
}

/// Everything the closed forms need at one point, evaluated once.
#[derive(Debug, Clone)]
pub struct Frame {
    pub n: usize,
    pub y: Vec<f64>,
    pub sigma: f64,
    /// `σ_i`
    pub sigma_grad: Vec<f64>,
    /// `σ_pq`
    pub sigma_hess: Array2<f64>,
    pub temporal: TemporalData,
    pub metric: SpatialMetric,
    /// `e^{−2σ} G^{−2/n}`
    pub conformal_inv: f64,
}

impl Frame {
    pub fn new(cfg: &GeometryConfig, p: &JetPoint) -> Result<Self> {
        p.validate(cfg.n)?;
        let jet = cfg.sigma_jet(&p.x)?;
        let temporal = temporal_data(cfg, p.t)?;
        let metric = metric_from_parts(cfg.n, jet.value, temporal.h11, &p.y);
        let conformal_inv =
            (-2.0 * jet.value).exp() / product_pow_2n(metric.g_product, cfg.n);
        Ok(Self {
            n: cfg.n,
            y: p.y.clone(),
            sigma: jet.value,
            sigma_grad: jet.gradient,
            sigma_hess: jet.hessian,
            temporal,
            metric,
            conformal_inv,
        })
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }
}

pub(crate) fn kron(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}
