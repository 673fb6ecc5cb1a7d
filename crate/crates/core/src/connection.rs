//! Spray, canonical nonlinear connection, Cartan canonical connection and
//! the two non-vanishing torsion d-tensors, all in closed form.
//!
//! Every "no sum" formula is written as an explicit componentwise loop;
//! there is no implicit summation anywhere in this module.

use ndarray::{Array2, Array3};

use crate::error::Result;
use crate::geometry::{kron, Frame, GeometryConfig, JetPoint};

/// Temporal and spatial spray components `H^{(i)}_{(1)1}`, `G^{(i)}_{(1)1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spray {
    pub h: Vec<f64>,
    pub g: Vec<f64>,
}

/// `M^{(i)}_{(1)1}` and `N^{(i)}_{(1)j}` (stored `[i][j]`).
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearConnection {
    pub m: Vec<f64>,
    pub n: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionBundle {
    pub h: Vec<f64>,
    pub gs: Vec<f64>,
    pub m: Vec<f64>,
    pub n: Array2<f64>,
    pub kappa: f64,
    /// `G^k_{j1}`, stored `[k][j]`.
    pub g_j1: Array2<f64>,
    /// `L^i_{jk}`, stored `[i][j][k]`.
    pub l: Array3<f64>,
    /// `C^{i(1)}_{j(k)}`, stored `[i][j][k]`.
    pub c: Array3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Torsions {
    /// `R^{(r)}_{(1)ij}`, stored `[r][i][j]`.
    pub r: Array3<f64>,
    /// `P^{r(1)}_{i(j)}`, stored `[r][i][j]`.
    pub p: Array3<f64>,
}

/// `H^{(i)} = −κyⁱ/2`, `G^{(i)} = (n/2) σ_i (yⁱ)²`.
pub fn spray(cfg: &GeometryConfig, p: &JetPoint) -> Result<Spray> {
    Ok(spray_at(&Frame::new(cfg, p)?))
}

pub fn spray_at(f: &Frame) -> Spray {
    let n = f.nf();
    let kappa = f.temporal.kappa;
    Spray {
        h: f.y.iter().map(|yi| -0.5 * kappa * yi).collect(),
        g: (0..f.n)
            .map(|i| 0.5 * n * f.sigma_grad[i] * f.y[i] * f.y[i])
            .collect(),
    }
}

/// `M^{(i)} = −κyⁱ`, `N^{(i)}_{(j)} = n σ_i yⁱ δ^i_j`.
pub fn nonlinear_connection(cfg: &GeometryConfig, p: &JetPoint) -> Result<NonlinearConnection> {
    Ok(nonlinear_at(&Frame::new(cfg, p)?))
}

pub fn nonlinear_at(f: &Frame) -> NonlinearConnection {
    let n = f.nf();
    let mut nl = Array2::zeros((f.n, f.n));
    for i in 0..f.n {
        nl[[i, i]] = n * f.sigma_grad[i] * f.y[i];
    }
    NonlinearConnection {
        m: f.y.iter().map(|yi| -f.temporal.kappa * yi).collect(),
        n: nl,
    }
}

/// `∂N^{(r)}_{(1)j}/∂y^k`, stored `[r][j][k]`.
pub fn nonlinear_y_derivative(f: &Frame) -> Array3<f64> {
    let mut d = Array3::zeros((f.n, f.n, f.n));
    for r in 0..f.n {
        d[[r, r, r]] = f.nf() * f.sigma_grad[r];
    }
    d
}

/// `𝙲^i_{jk} = −2/n² + (δ^i_j + δ^i_k + δ_{jk})/n − δ^i_j δ^i_k`.
pub fn c_constants(n: usize) -> Array3<f64> {
    let nf = n as f64;
    Array3::from_shape_fn((n, n, n), |(i, j, k)| {
        -2.0 / (nf * nf) + (kron(i, j) + kron(i, k) + kron(j, k)) / nf - kron(i, j) * kron(i, k)
    })
}

/// `C^{i(1)}_{j(k)} = 𝙲^i_{jk} yⁱ/(y^j y^k)`.
pub(crate) fn cartan_c(y: &[f64]) -> Array3<f64> {
    let n = y.len();
    let consts = c_constants(n);
    Array3::from_shape_fn((n, n, n), |(i, j, k)| consts[[i, j, k]] * y[i] / (y[j] * y[k]))
}

/// `L^i_{jk} = n δ^i_j δ^i_k σ_i`.
pub(crate) fn cartan_l(n: usize, sigma_grad: &[f64]) -> Array3<f64> {
    let mut l = Array3::zeros((n, n, n));
    for i in 0..n {
        l[[i, i, i]] = n as f64 * sigma_grad[i];
    }
    l
}

pub fn cartan(cfg: &GeometryConfig, p: &JetPoint) -> Result<ConnectionBundle> {
    Ok(cartan_at(&Frame::new(cfg, p)?))
}

pub fn cartan_at(f: &Frame) -> ConnectionBundle {
    let spray = spray_at(f);
    let nl = nonlinear_at(f);
    ConnectionBundle {
        h: spray.h,
        gs: spray.g,
        m: nl.m,
        n: nl.n,
        kappa: f.temporal.kappa,
        g_j1: Array2::zeros((f.n, f.n)),
        l: cartan_l(f.n, &f.sigma_grad),
        c: cartan_c(&f.y),
    }
}

/// `R^{(r)}_{(1)ij} = n(δ^r_i σ_{rj} − δ^r_j σ_{ri}) y^r` and `P^{r(1)}_{i(j)} = C^{r(1)}_{i(j)}`.
pub fn torsions(cfg: &GeometryConfig, p: &JetPoint) -> Result<Torsions> {
    Ok(torsions_at(&Frame::new(cfg, p)?))
}

pub fn torsions_at(f: &Frame) -> Torsions {
    let n = f.n;
    let nf = f.nf();
    let mut r = Array3::zeros((n, n, n));
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                r[[k, i, j]] = nf
                    * (kron(k, i) * f.sigma_hess[[k, j]] - kron(k, j) * f.sigma_hess[[k, i]])
                    * f.y[k];
            }
        }
    }
    Torsions {
        r,
        p: cartan_c(&f.y),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, sigma: &str, h11: &str) -> GeometryConfig {
        GeometryConfig::new(n, sigma, h11, 1.0).unwrap()
    }

    fn pt(t: f64, x: &[f64], y: &[f64]) -> JetPoint {
        JetPoint::new(t, x.to_vec(), y.to_vec())
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn flat_baseline_vanishes() {
        let c = cfg(3, "0", "1");
        let p = pt(0.3, &[0.1, 0.2, 0.3], &[1.0, 2.0, 4.0]);
        let s = spray(&c, &p).unwrap();
        assert!(s.h.iter().chain(&s.g).all(|v| *v == 0.0));
        let nl = nonlinear_connection(&c, &p).unwrap();
        assert!(nl.m.iter().all(|v| *v == 0.0));
        assert!(nl.n.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn spray_examples() {
        let c = cfg(3, "x1", "1");
        let p = pt(0.0, &[0.0; 3], &[2.0, 1.0, 1.0]);
        assert_eq!(spray(&c, &p).unwrap().g, vec![6.0, 0.0, 0.0]);
        let c = cfg(3, "0", "exp(2*t)");
        assert_eq!(spray(&c, &p).unwrap().h, vec![-1.0, -0.5, -0.5]);
    }

    #[test]
    fn nonlinear_examples() {
        let c = cfg(3, "x1", "1");
        let p = pt(0.0, &[0.0; 3], &[2.0, 1.0, 1.0]);
        let nl = nonlinear_connection(&c, &p).unwrap();
        assert_eq!(nl.n, Array2::from_diag(&ndarray::arr1(&[6.0, 0.0, 0.0])));
        let c = cfg(3, "0", "exp(2*t)");
        assert_eq!(nonlinear_connection(&c, &p).unwrap().m, vec![-2.0, -1.0, -1.0]);
    }

    #[test]
    fn c_constant_examples() {
        let c = c_constants(3);
        assert!(close(c[[0, 0, 0]], -2.0 / 9.0));
        assert!(close(c[[0, 1, 1]], 1.0 / 9.0));
        assert!(close(c[[0, 1, 2]], -2.0 / 9.0));
        for n in 2..7 {
            let c = c_constants(n);
            for i in 0..n {
                for j in 0..n {
                    let row: f64 = (0..n).map(|k| c[[i, j, k]]).sum();
                    assert!(row.abs() < 1e-14);
                    for k in 0..n {
                        assert_eq!(c[[i, j, k]], c[[i, k, j]]);
                    }
                }
            }
        }
    }

    #[test]
    fn cartan_examples() {
        let c = cfg(3, "x1", "exp(2*t)");
        let b = cartan(&c, &pt(0.0, &[0.0; 3], &[1.0, 1.0, 1.0])).unwrap();
        for ((i, j, k), v) in b.l.indexed_iter() {
            assert_eq!(*v, if (i, j, k) == (0, 0, 0) { 3.0 } else { 0.0 });
        }
        assert!(b.g_j1.iter().all(|v| *v == 0.0));
        assert!(close(b.c[[0, 0, 0]], -2.0 / 9.0));
        assert!(close(b.c[[0, 1, 1]], 1.0 / 9.0));
        assert_eq!(b.kappa, 1.0);
        for i in 0..3 {
            assert_eq!(b.m[i], 2.0 * b.h[i]);
        }
    }

    #[test]
    fn torsion_examples() {
        let p = pt(0.0, &[0.0; 3], &[1.0, 1.0, 1.0]);
        for sigma in ["0", "x1 + 2*x2 - x3"] {
            let t = torsions(&cfg(3, sigma, "1"), &p).unwrap();
            assert!(t.r.iter().all(|v| *v == 0.0));
        }
        let c = cfg(3, "x1*x2", "1");
        let t = torsions(&c, &p).unwrap();
        assert_eq!(t.r[[0, 0, 1]], 3.0);
        assert_eq!(t.r[[1, 0, 1]], -3.0);
        assert_eq!(t.p, cartan(&c, &p).unwrap().c);
        for ((r, i, j), v) in t.r.indexed_iter() {
            assert_eq!(*v, -t.r[[r, j, i]]);
        }
    }
}
