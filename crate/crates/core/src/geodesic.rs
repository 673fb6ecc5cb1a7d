//! Fixed-step integration of the Euler-Lagrange system
//!
//! ```text
//! dx/dt = y,    dy/dt = −2H(t, x, y) − 2G(t, x, y)
//! ```
//!
//! of the energy functional, and the residual of sampled trajectories.

use thiserror::Error;

use crate::connection::spray;
use crate::error::GeometryError;
use crate::geometry::{product_g, GeometryConfig, JetPoint};

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicProblem {
    pub cfg: GeometryConfig,
    pub t0: f64,
    pub t1: f64,
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeodesicError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("trajectory left the domain near t = {t}; {} valid samples kept", partial.samples.len())]
    DomainExit { t: f64, partial: Trajectory },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("residual needs at least 3 samples, got {0}")]
    TooFewSamples(usize),
}

impl GeodesicProblem {
    pub fn validate(&self) -> Result<(), GeodesicError> {
        let n = self.cfg.n();
        if self.steps == 0 {
            return Err(GeodesicError::Invalid("steps must be positive".into()));
        }
        if !(self.t1 > self.t0) || !self.t0.is_finite() || !self.t1.is_finite() {
            return Err(GeodesicError::Invalid(format!(
                "need finite t1 > t0, got t0 = {}, t1 = {}",
                self.t0, self.t1
            )));
        }
        if self.x0.len() != n || self.y0.len() != n {
            return Err(GeodesicError::Invalid(format!(
                "x0 and y0 must have {n} components, got {} and {}",
                self.x0.len(),
                self.y0.len()
            )));
        }
        JetPoint::new(self.t0, self.x0.clone(), self.y0.clone()).validate(n)?;
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }
}

/// `ẍ = −2H − 2G` at `(t, x, y)`.
pub fn acceleration(cfg: &GeometryConfig, t: f64, x: &[f64], y: &[f64]) -> Result<Vec<f64>, GeometryError> {
    let s = spray(cfg, &JetPoint::new(t, x.to_vec(), y.to_vec()))?;
    Ok(s.h.iter().zip(&s.g).map(|(h, g)| -2.0 * (h + g)).collect())
}

fn axpy(base: &[f64], a: f64, v: &[f64]) -> Vec<f64> {
    base.iter().zip(v).map(|(b, d)| b + a * d).collect()
}

/// Classical RK4 on the state `(x, y)`. Every stage state must stay in the
/// domain `y¹⋯yⁿ > 0` and remain finite; otherwise the samples integrated so far are returned
/// inside [`GeodesicError::DomainExit`].
pub fn integrate(prob: &GeodesicProblem) -> Result<Trajectory, GeodesicError> {
    prob.validate()?;
    let cfg = &prob.cfg;
    let h = prob.step();
    let mut samples = Vec::with_capacity(prob.steps + 1);
    let (mut x, mut y) = (prob.x0.clone(), prob.y0.clone());
    samples.push(Sample {
        t: prob.t0,
        x: x.clone(),
        y: y.clone(),
    });
    for k in 0..prob.steps {
        let t = prob.t0 + k as f64 * h;
        let stage = |t: f64, x: &[f64], y: &[f64]| -> Option<(Vec<f64>, Vec<f64>)> {
            if !(product_g(y) > 0.0) {
                return None;
            }
            acceleration(cfg, t, x, y).ok().map(|a| (y.to_vec(), a))
        };
        let step = (|| {
            let (k1x, k1y) = stage(t, &x, &y)?;
            let (k2x, k2y) = stage(t + 0.5 * h, &axpy(&x, 0.5 * h, &k1x), &axpy(&y, 0.5 * h, &k1y))?;
            let (k3x, k3y) = stage(t + 0.5 * h, &axpy(&x, 0.5 * h, &k2x), &axpy(&y, 0.5 * h, &k2y))?;
            let (k4x, k4y) = stage(t + h, &axpy(&x, h, &k3x), &axpy(&y, h, &k3y))?;
            let combine = |s: &[f64], a: &[f64], b: &[f64], c: &[f64], d: &[f64]| -> Vec<f64> {
                (0..s.len())
                    .map(|i| s[i] + h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]))
                    .collect()
            };
            let nx = combine(&x, &k1x, &k2x, &k3x, &k4x);
            let ny = combine(&y, &k1y, &k2y, &k3y, &k4y);
            (product_g(&ny) > 0.0 && ny.iter().chain(&nx).all(|v| v.is_finite())).then_some((nx, ny))
        })();
        match step {
            Some((nx, ny)) => {
                x = nx;
                y = ny;
                samples.push(Sample {
                    t: if k + 1 == prob.steps { prob.t1 } else { prob.t0 + (k + 1) as f64 * h },
                    x: x.clone(),
                    y: y.clone(),
                });
            }
            None => {
                return Err(GeodesicError::DomainExit {
                    t,
                    partial: Trajectory { samples, step: h },
                })
            }
        }
    }
    Ok(Trajectory { samples, step: h })
}

/// `max |ẍ + 2H + 2G|` over interior samples, with `ẍ` from the
/// three-point central difference of the sampled `x` and `H`, `G`
/// evaluated at the sampled `(t, x, y)`.
pub fn el_residual(prob: &GeodesicProblem, traj: &Trajectory) -> Result<f64, GeodesicError> {
    let s = &traj.samples;
    if s.len() < 3 {
        return Err(GeodesicError::TooFewSamples(s.len()));
    }
    let h = traj.step;
    let mut worst = 0.0f64;
    for k in 1..s.len() - 1 {
        let acc = acceleration(&prob.cfg, s[k].t, &s[k].x, &s[k].y)?;
        for i in 0..acc.len() {
            let xdd = (s[k + 1].x[i] - 2.0 * s[k].x[i] + s[k - 1].x[i]) / (h * h);
            worst = worst.max((xdd - acc[i]).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(sigma: &str, h11: &str, y0: &[f64], steps: usize) -> GeodesicProblem {
        GeodesicProblem {
            cfg: GeometryConfig::new(y0.len(), sigma, h11, 1.0).unwrap(),
            t0: 0.0,
            t1: 1.0,
            x0: vec![0.0; y0.len()],
            y0: y0.to_vec(),
            steps,
        }
    }

    #[test]
    fn straight_line() {
        let p = problem("0", "1", &[1.0, 2.0, 4.0], 100);
        let tr = integrate(&p).unwrap();
        assert_eq!(tr.samples.len(), 101);
        let last = tr.samples.last().unwrap();
        assert_eq!(last.t, 1.0);
        for (a, b) in last.x.iter().zip([1.0, 2.0, 4.0]) {
            assert!((a - b).abs() <= 1e-12);
        }
        assert!(tr.samples.iter().all(|s| s.y == vec![1.0, 2.0, 4.0]));
        assert!(el_residual(&p, &tr).unwrap() <= 1e-10);
    }

    #[test]
    fn conformal_factor_bends_only_first_coordinate() {
        let p = problem("x1", "1", &[1.0, 1.0, 1.0], 200);
        let tr = integrate(&p).unwrap();
        for s in &tr.samples {
            assert_eq!(s.y[1], 1.0);
            assert_eq!(s.y[2], 1.0);
        }
        let last = tr.samples.last().unwrap();
        assert!(last.y[0] < 1.0);
    }

    #[test]
    fn temporal_acceleration_at_start() {
        let cfg = GeometryConfig::new(3, "0", "exp(2*t)", 1.0).unwrap();
        let a = acceleration(&cfg, 0.0, &[0.0; 3], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(a, vec![1.0, 1.0, 1.0]);
    }

    fn x1_residual(y0: &[f64], steps: usize) -> f64 {
        let p = problem("x1", "1", y0, steps);
        el_residual(&p, &integrate(&p).unwrap()).unwrap()
    }

    #[test]
    fn residual_budget_and_order() {
        let y0 = [0.5, 1.0, 2.0];
        let (coarse, fine) = (x1_residual(&y0, 500), x1_residual(&y0, 1000));
        assert!(fine <= 1e-5, "{fine}");
        let ratio = coarse / fine;
        assert!((3.5..4.5).contains(&ratio), "{ratio}");
    }

    #[test]
    fn residual_matches_stencil_truncation() {
        // y¹ = 1/(1 + 3t), so x'''' = −162/(1 + 3t)⁴ and the three-point
        // stencil error at the first interior sample is ≈ h²·162/12
        let h: f64 = 1e-3;
        let r = x1_residual(&[1.0, 1.0, 1.0], 1000);
        let predicted = h * h * 162.0 / 12.0 / (1.0 + 3.0 * h).powi(4);
        assert!((r / predicted - 1.0).abs() < 0.02, "{r} vs {predicted}");
    }

    #[test]
    fn validation() {
        let mut p = problem("0", "1", &[1.0, 1.0], 0);
        assert!(matches!(integrate(&p), Err(GeodesicError::Invalid(_))));
        p.steps = 10;
        p.t1 = -1.0;
        assert!(matches!(integrate(&p), Err(GeodesicError::Invalid(_))));
        p.t1 = 1.0;
        p.y0 = vec![1.0, -1.0];
        assert!(matches!(integrate(&p), Err(GeodesicError::Geometry(_))));
        p.y0 = vec![1.0];
        assert!(matches!(integrate(&p), Err(GeodesicError::Invalid(_))));
    }

    #[test]
    fn domain_exit_keeps_partial_trajectory() {
        // dy¹/dt = −3(y¹)²; one unit step overshoots y¹ through zero at the
        // midpoint stage
        let p = problem("x1", "1", &[1.0, 1.0, 1.0], 1);
        match integrate(&p) {
            Err(GeodesicError::DomainExit { t, partial }) => {
                assert_eq!(t, 0.0);
                assert_eq!(partial.samples.len(), 1);
                assert!(partial.samples.iter().all(|s| product_g(&s.y) > 0.0));
            }
            other => panic!("expected domain exit, got {other:?}"),
        }
    }
}
