//! Central finite differences over jet coordinates with domain-aware step
//! control.

use crate::error::{GeometryError, Result};
use crate::geometry::JetPoint;

/// One jet coordinate: `t`, `xⁱ` or `yⁱ` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coord {
    T,
    X(usize),
    Y(usize),
}

impl Coord {
    /// `t, x0..x(n-1), y0..y(n-1)`.
    pub fn all(n: usize) -> impl Iterator<Item = Coord> {
        std::iter::once(Coord::T)
            .chain((0..n).map(Coord::X))
            .chain((0..n).map(Coord::Y))
    }
}

impl JetPoint {
    pub fn coord(&self, c: Coord) -> f64 {
        match c {
            Coord::T => self.t,
            Coord::X(i) => self.x[i],
            Coord::Y(i) => self.y[i],
        }
    }

    pub fn shifted(&self, c: Coord, delta: f64) -> JetPoint {
        let mut q = self.clone();
        match c {
            Coord::T => q.t += delta,
            Coord::X(i) => q.x[i] += delta,
            Coord::Y(i) => q.y[i] += delta,
        }
        q
    }
}

/// Central-difference configuration.
///
/// The base step for a coordinate with value `c` is
/// `eps · max(1, |c|)`; `first_eps` is used for first derivatives and
/// `second_eps` for second derivatives and for differentiating quantities
/// that are themselves finite-difference results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffScheme {
    pub first_eps: f64,
    pub second_eps: f64,
    /// One level of Richardson extrapolation, `(4 D(h/2) − D(h)) / 3`.
    pub richardson: bool,
    /// How many times a step may be halved to keep the stencil in the domain.
    pub max_shrink: u32,
}

impl Default for DiffScheme {
    fn default() -> Self {
        Self {
            first_eps: 1e-5,
            second_eps: 1e-4,
            richardson: false,
            max_shrink: 30,
        }
    }
}

impl DiffScheme {
    pub fn with_richardson(mut self, on: bool) -> Self {
        self.richardson = on;
        self
    }

    pub fn with_steps(mut self, first_eps: f64, second_eps: f64) -> Self {
        self.first_eps = first_eps;
        self.second_eps = second_eps;
        self
    }

    /// The same scheme with `second_eps` promoted to the first-derivative
    /// step, for differentiating finite-difference outputs.
    pub fn nested(self) -> Self {
        Self {
            first_eps: self.second_eps,
            ..self
        }
    }
}

fn base_step(eps: f64, value: f64) -> f64 {
    eps * value.abs().max(1.0)
}

fn axpy(out: &mut [f64], a: f64, v: &[f64]) {
    for (o, x) in out.iter_mut().zip(v) {
        *o += a * x;
    }
}

fn stencil_error(p: &JetPoint, err: &GeometryError) -> GeometryError {
    GeometryError::Stencil(format!("t={}, x={:?}, y={:?} ({err})", p.t, p.x, p.y))
}

/// Evaluates `stencil(h)` for the largest `h = h0 / 2^s` at which every
/// point of the stencil evaluates successfully.
fn shrink<T>(
    scheme: &DiffScheme,
    p: &JetPoint,
    h0: f64,
    mut stencil: impl FnMut(f64) -> Result<T>,
) -> Result<T> {
    let mut h = h0;
    let mut last = None;
    for _ in 0..=scheme.max_shrink {
        match stencil(h) {
            Ok(v) => return Ok(v),
            Err(e) => last = Some(e),
        }
        h *= 0.5;
    }
    Err(stencil_error(p, &last.expect("at least one attempt")))
}

fn richardson(scheme: &DiffScheme, coarse: Vec<f64>, fine: impl FnOnce() -> Result<Vec<f64>>) -> Result<Vec<f64>> {
    if !scheme.richardson {
        return Ok(coarse);
    }
    let fine = fine()?;
    Ok(fine
        .iter()
        .zip(&coarse)
        .map(|(f, c)| (4.0 * f - c) / 3.0)
        .collect())
}

/// `∂f/∂c` of a vector-valued field by central differences.
pub fn partial<F>(scheme: &DiffScheme, p: &JetPoint, c: Coord, f: F) -> Result<Vec<f64>>
where
    F: Fn(&JetPoint) -> Result<Vec<f64>>,
{
    partial_eps(scheme, scheme.first_eps, p, c, &f)
}

fn partial_eps<F>(scheme: &DiffScheme, eps: f64, p: &JetPoint, c: Coord, f: &F) -> Result<Vec<f64>>
where
    F: Fn(&JetPoint) -> Result<Vec<f64>>,
{
    let central = |h: f64| -> Result<Vec<f64>> {
        let plus = f(&p.shifted(c, h))?;
        let minus = f(&p.shifted(c, -h))?;
        let mut d = vec![0.0; plus.len()];
        axpy(&mut d, 0.5 / h, &plus);
        axpy(&mut d, -0.5 / h, &minus);
        Ok(d)
    };
    shrink(scheme, p, base_step(eps, p.coord(c)), |h| {
        let coarse = central(h)?;
        richardson(scheme, coarse, || central(0.5 * h))
    })
}

/// `∂²f/∂c1∂c2` of a vector-valued field, using `second_eps`.
pub fn second_partial<F>(scheme: &DiffScheme, p: &JetPoint, c1: Coord, c2: Coord, f: F) -> Result<Vec<f64>>
where
    F: Fn(&JetPoint) -> Result<Vec<f64>>,
{
    let h1 = base_step(scheme.second_eps, p.coord(c1));
    if c1 == c2 {
        let stencil = |h: f64| -> Result<Vec<f64>> {
            let plus = f(&p.shifted(c1, h))?;
            let mid = f(p)?;
            let minus = f(&p.shifted(c1, -h))?;
            let mut d = vec![0.0; mid.len()];
            let w = 1.0 / (h * h);
            axpy(&mut d, w, &plus);
            axpy(&mut d, -2.0 * w, &mid);
            axpy(&mut d, w, &minus);
            Ok(d)
        };
        return shrink(scheme, p, h1, |h| {
            let coarse = stencil(h)?;
            richardson(scheme, coarse, || stencil(0.5 * h))
        });
    }
    let ratio = base_step(scheme.second_eps, p.coord(c2)) / h1;
    let stencil = |h: f64| -> Result<Vec<f64>> {
        let k = h * ratio;
        let pp = f(&p.shifted(c1, h).shifted(c2, k))?;
        let pm = f(&p.shifted(c1, h).shifted(c2, -k))?;
        let mp = f(&p.shifted(c1, -h).shifted(c2, k))?;
        let mm = f(&p.shifted(c1, -h).shifted(c2, -k))?;
        let mut d = vec![0.0; pp.len()];
        let w = 0.25 / (h * k);
        axpy(&mut d, w, &pp);
        axpy(&mut d, -w, &pm);
        axpy(&mut d, -w, &mp);
        axpy(&mut d, w, &mm);
        Ok(d)
    };
    shrink(scheme, p, h1, |h| {
        let coarse = stencil(h)?;
        richardson(scheme, coarse, || stencil(0.5 * h))
    })
}

/// Partial derivatives of `f` along every jet coordinate, in
/// [`Coord::all`] order.
pub fn all_partials<F>(scheme: &DiffScheme, p: &JetPoint, f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&JetPoint) -> Result<Vec<f64>>,
{
    Coord::all(p.x.len())
        .map(|c| partial_eps(scheme, scheme.first_eps, p, c, &f))
        .collect()
}

/// Scalar derivative of a one-variable function, with the same step rule.
pub fn derivative_1d(scheme: &DiffScheme, at: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let central = |h: f64| -> Result<f64> { Ok((f(at + h)? - f(at - h)?) / (2.0 * h)) };
    let mut h = base_step(scheme.first_eps, at);
    let mut last = None;
    for _ in 0..=scheme.max_shrink {
        let attempt = central(h).and_then(|coarse| {
            if scheme.richardson {
                Ok((4.0 * central(0.5 * h)? - coarse) / 3.0)
            } else {
                Ok(coarse)
            }
        });
        match attempt {
            Ok(v) => return Ok(v),
            Err(e) => last = Some(e),
        }
        h *= 0.5;
    }
    Err(GeometryError::Stencil(format!(
        "t={at} ({})",
        last.expect("at least one attempt")
    )))
}
