//! Curvature d-tensors of the Cartan canonical connection, the Ricci pair,
//! scalar curvature, the Einstein-like blocks, the stress-energy components
//! with their conservation laws, and the electromagnetic 2-form.

use ndarray::{Array2, Array3, Array4};

use crate::connection::{cartan_at, nonlinear_at, nonlinear_y_derivative, ConnectionBundle};
use crate::error::Result;
use crate::geometry::{kron, Frame, GeometryConfig, JetPoint};
use crate::oracle::diff::{all_partials, DiffScheme};
use crate::oracle::OracleSchemes;

#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureBundle {
    /// `R^l_{ijk}`, stored `[l][i][j][k]`.
    pub r_curv: Array4<f64>,
    /// `P^{l (1)}_{ij(k)}`, stored `[l][i][j][k]`.
    pub p_curv: Array4<f64>,
    /// `S^{l(1)(1)}_{i(j)(k)}`, stored `[l][i][j][k]`.
    pub s_curv: Array4<f64>,
    /// `R_ij`
    pub ricci_r: Array2<f64>,
    /// `S^{(1)(1)}_{(i)(j)}`
    pub ricci_s: Array2<f64>,
    pub y11: f64,
    pub scalar_curvature: f64,
}

/// Left-hand sides of the local Einstein-like equations.
#[derive(Debug, Clone, PartialEq)]
pub struct EinsteinBlocks {
    pub tt: f64,
    pub xx: Array2<f64>,
    pub vv: Array2<f64>,
    pub zero: Vec<ZeroBlock>,
}

/// A component family that vanishes identically.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroBlock {
    pub name: &'static str,
    pub values: Vec<f64>,
}

const ZERO_EQUATIONS: [(&str, bool); 6] = [
    ("T_1i", false),
    ("T_i1", false),
    ("T^(1)_(i)1", false),
    ("T^(1)_1(i)", false),
    ("T^(1)_i(j)", true),
    ("T^(1)_(i)j", true),
];

fn zero_blocks(n: usize) -> Vec<ZeroBlock> {
    ZERO_EQUATIONS
        .iter()
        .map(|&(name, square)| ZeroBlock {
            name,
            values: vec![0.0; if square { n * n } else { n }],
        })
        .collect()
}

/// Stress-energy d-tensor `T` with its mixed-index forms.
///
/// Mixed forms are stored `[m][i]` (upper index first).
#[derive(Debug, Clone, PartialEq)]
pub struct StressEnergy {
    pub t11: f64,
    pub t_ij: Array2<f64>,
    /// `T^{(1)(1)}_{(i)(j)}`
    pub t_vv: Array2<f64>,
    pub zero_blocks: Vec<ZeroBlock>,
    /// `T¹₁`
    pub t_up1_down1: f64,
    /// `T^m₁`
    pub t_up_m_down1: Vec<f64>,
    /// `T^{(m)}_{(1)1}`
    pub t_vert_m_down1: Vec<f64>,
    /// `T¹ᵢ`
    pub t_up1_down_i: Vec<f64>,
    /// `E^m_i = T^m_i`
    pub e_mixed: Array2<f64>,
    /// `T^{(m)}_{(1)i}`
    pub t_vert_m_down_i: Array2<f64>,
    /// `T^{1(1)}_{(i)}`
    pub t_up1_vert_i: Vec<f64>,
    /// `T^{m(1)}_{(i)}`
    pub t_up_m_vert_i: Array2<f64>,
    /// `T^{(m)(1)}_{(1)(i)}`
    pub t_vert_vert: Array2<f64>,
}

/// Absolute residuals (LHS − RHS) of the three conservation laws; the
/// second and third are maxima over the free index `i`. `scale` is
/// `max(1, max |field|)` over the differentiated stress-energy fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationResiduals {
    pub first: f64,
    pub second: f64,
    pub third: f64,
    pub scale: f64,
}

impl ConservationResiduals {
    pub fn max(&self) -> f64 {
        self.first.max(self.second).max(self.third)
    }

    /// [`Self::max`] divided by [`Self::scale`].
    pub fn scaled_max(&self) -> f64 {
        self.max() / self.scale
    }
}

/// `∂C^{l(1)}_{i(k)}/∂y^p`, stored `[l][i][k][p]`.
fn c_y_derivative(c: &Array3<f64>, y: &[f64]) -> Array4<f64> {
    let n = y.len();
    Array4::from_shape_fn((n, n, n, n), |(l, i, k, p)| {
        c[[l, i, k]] * (kron(l, p) - kron(i, p) - kron(k, p)) / y[p]
    })
}

/// `C^{l(1)}_{i(k)|j}`, stored `[l][i][k][j]`.
pub fn covariant_c_derivative(cfg: &GeometryConfig, p: &JetPoint) -> Result<Array4<f64>> {
    let f = Frame::new(cfg, p)?;
    Ok(covariant_c_at(&f, &cartan_at(&f)))
}

/// `δC^l_{ik}/δx^j + C^r_{ik}L^l_{rj} − C^l_{rk}L^r_{ij} − C^l_{ir}L^r_{kj}`
/// with `δ/δx^j = ∂/∂x^j − N^{(p)}_{(1)j} ∂/∂y^p` (C is x-independent).
pub(crate) fn covariant_c_at(f: &Frame, b: &ConnectionBundle) -> Array4<f64> {
    let n = f.n;
    let dc = c_y_derivative(&b.c, &f.y);
    let (c, l) = (&b.c, &b.l);
    Array4::from_shape_fn((n, n, n, n), |(li, i, k, j)| {
        let mut v = 0.0;
        for p in 0..n {
            v -= b.n[[p, j]] * dc[[li, i, k, p]];
        }
        for r in 0..n {
            v += c[[r, i, k]] * l[[li, r, j]];
            v -= c[[li, r, k]] * l[[r, i, j]];
            v -= c[[li, i, r]] * l[[r, k, j]];
        }
        v
    })
}

pub fn curvature_tensors(cfg: &GeometryConfig, p: &JetPoint) -> Result<CurvatureBundle> {
    Ok(curvature_at(&Frame::new(cfg, p)?))
}

pub fn curvature_at(f: &Frame) -> CurvatureBundle {
    let n = f.n;
    let nf = f.nf();
    let b = cartan_at(f);
    let tor = crate::connection::torsions_at(f);
    let (c, l, s) = (&b.c, &b.l, &f.sigma_grad);

    // ∂L^l_{ij}/∂x^k = n δ^l_i δ^l_j σ_{lk}
    let dl = |li: usize, i: usize, j: usize, k: usize| nf * kron(li, i) * kron(li, j) * f.sigma_hess[[li, k]];
    let r_curv = Array4::from_shape_fn((n, n, n, n), |(li, i, j, k)| {
        let mut v = dl(li, i, j, k) - dl(li, i, k, j);
        for r in 0..n {
            v += l[[r, i, j]] * l[[li, r, k]] - l[[r, i, k]] * l[[li, r, j]];
            v += c[[li, i, r]] * tor.r[[r, j, k]];
        }
        v
    });

    // P = ∂L/∂y − C_{|j} + C·P_nl. The h-covariant derivative of C is
    // evaluated here from its per-index reduction (L and N are diagonal),
    // a separate path from `covariant_c_at`.
    let p_nl = nonlinear_y_derivative(f) - l;
    let p_curv = Array4::from_shape_fn((n, n, n, n), |(li, i, j, k)| {
        let c_bar = nf
            * c[[li, i, k]]
            * (s[j] * (kron(i, j) + kron(k, j) - kron(li, j)) + s[li] * kron(li, j)
                - s[i] * kron(i, j)
                - s[k] * kron(k, j));
        let mut v = -c_bar;
        for r in 0..n {
            v += c[[li, i, r]] * p_nl[[r, j, k]];
        }
        v
    });

    let dc = c_y_derivative(c, &f.y);
    let s_curv = Array4::from_shape_fn((n, n, n, n), |(li, i, j, k)| {
        let mut v = dc[[li, i, j, k]] - dc[[li, i, k, j]];
        for r in 0..n {
            v += c[[r, i, j]] * c[[li, r, k]] - c[[r, i, k]] * c[[li, r, j]];
        }
        v
    });

    let (ricci_r, ricci_s) = ricci_at(f);
    let (scalar_curvature, y11) = scalar_curvature_at(f);
    CurvatureBundle {
        r_curv,
        p_curv,
        s_curv,
        ricci_r,
        ricci_s,
        y11,
        scalar_curvature,
    }
}

pub fn ricci(cfg: &GeometryConfig, p: &JetPoint) -> Result<(Array2<f64>, Array2<f64>)> {
    Ok(ricci_at(&Frame::new(cfg, p)?))
}

/// `R_ij = −σ_ij − Σ_{m≠j} σ_jm y^m/yⁱ` off the diagonal, `0` on it;
/// `S_(i)(j) = [2/n² − 1/n + (1 − 2/n)δ_ij]/(yⁱy^j)`.
pub fn ricci_at(f: &Frame) -> (Array2<f64>, Array2<f64>) {
    let n = f.n;
    let nf = f.nf();
    let y = &f.y;
    let mut rr = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let mut v = -f.sigma_hess[[i, j]];
            for m in (0..n).filter(|m| *m != j) {
                v -= f.sigma_hess[[j, m]] * y[m] / y[i];
            }
            rr[[i, j]] = v;
        }
    }
    let rs = Array2::from_shape_fn((n, n), |(i, j)| {
        (2.0 / (nf * nf) - 1.0 / nf + (1.0 - 2.0 / nf) * kron(i, j)) / (y[i] * y[j])
    });
    (rr, rs)
}

/// `Y₁₁ = Σ_{p<q} σ_pq yᵖy^q`.
pub(crate) fn y11_at(f: &Frame) -> f64 {
    let mut y11 = 0.0;
    for p in 0..f.n {
        for q in p + 1..f.n {
            y11 += f.sigma_hess[[p, q]] * f.y[p] * f.y[q];
        }
    }
    y11
}

/// Returns `(Sc, Y₁₁)`.
pub fn scalar_curvature(cfg: &GeometryConfig, p: &JetPoint) -> Result<(f64, f64)> {
    Ok(scalar_curvature_at(&Frame::new(cfg, p)?))
}

pub fn scalar_curvature_at(f: &Frame) -> (f64, f64) {
    let nf = f.nf();
    let y11 = y11_at(f);
    let sc = -f.conformal_inv * (4.0 * nf * y11 + (nf * nf - 3.0 * nf + 2.0) * f.temporal.h11);
    (sc, y11)
}

/// `e^{−2σ}G^{−2/n}[2nY₁₁ + ((n²−3n+2)/2)h₁₁]`, shared by the Einstein
/// blocks and the stress-energy components.
pub fn einstein_bracket(f: &Frame) -> f64 {
    let nf = f.nf();
    f.conformal_inv * (2.0 * nf * y11_at(f) + 0.5 * (nf * nf - 3.0 * nf + 2.0) * f.temporal.h11)
}

pub fn einstein_blocks(cfg: &GeometryConfig, p: &JetPoint) -> Result<EinsteinBlocks> {
    Ok(einstein_at(&Frame::new(cfg, p)?))
}

pub fn einstein_at(f: &Frame) -> EinsteinBlocks {
    let bracket = einstein_bracket(f);
    let (rr, rs) = ricci_at(f);
    let g = &f.metric.g;
    EinsteinBlocks {
        tt: bracket * f.temporal.h11,
        xx: &rr + &(g * bracket),
        vv: &rs + &(g * (bracket * f.temporal.h11_inv)),
        zero: zero_blocks(f.n),
    }
}

pub fn stress_energy(cfg: &GeometryConfig, p: &JetPoint) -> Result<StressEnergy> {
    Ok(stress_energy_at(&Frame::new(cfg, p)?, cfg.einstein_k()))
}

pub fn stress_energy_at(f: &Frame, einstein_k: f64) -> StressEnergy {
    let n = f.n;
    let nf = f.nf();
    let k_inv = 1.0 / einstein_k;
    let e = einstein_at(f);
    let bracket = einstein_bracket(f);
    let (rr, _) = ricci_at(f);
    let g_inv = &f.metric.g_inv;
    let h11 = f.temporal.h11;
    let y11 = y11_at(f);

    let e_mixed = Array2::from_shape_fn((n, n), |(m, i)| {
        let mut v = bracket * kron(m, i);
        for r in 0..n {
            v += g_inv[[m, r]] * rr[[r, i]];
        }
        k_inv * v
    });
    let t_vert_vert = Array2::from_shape_fn((n, n), |(m, i)| {
        k_inv
            * f.conformal_inv
            * ((nf - 2.0) / nf * h11 * f.y[m] / f.y[i]
                + (2.0 * nf * y11 + 0.5 * (nf * nf - 5.0 * nf + 6.0) * h11) * kron(m, i))
    });
    StressEnergy {
        t11: k_inv * e.tt,
        t_ij: &e.xx * k_inv,
        t_vv: &e.vv * k_inv,
        zero_blocks: e.zero,
        t_up1_down1: k_inv * bracket,
        t_up_m_down1: vec![0.0; n],
        t_vert_m_down1: vec![0.0; n],
        t_up1_down_i: vec![0.0; n],
        e_mixed,
        t_vert_m_down_i: Array2::zeros((n, n)),
        t_up1_vert_i: vec![0.0; n],
        t_up_m_vert_i: Array2::zeros((n, n)),
        t_vert_vert,
    }
}

/// Field values differentiated by the conservation laws, flattened:
/// `T¹₁ | T^m₁ | T^{(m)}_{(1)1} | T¹ᵢ | T^m_i | T^{(m)}_{(1)i} | T^{1(1)}_{(i)} | T^{m(1)}_{(i)} | T^{(m)(1)}_{(1)(i)} | E^m_i`.
/// `T^m_i` and `T^{(m)(1)}_{(1)(i)}` are raised here by contraction with
/// `g^{mr}`; `E^m_i` is the closed display.
struct FieldLayout {
    n: usize,
}

impl FieldLayout {
    fn len(&self) -> usize {
        1 + 4 * self.n + 5 * self.n * self.n
    }
    fn t11(&self) -> usize {
        0
    }
    fn t_m1(&self, m: usize) -> usize {
        1 + m
    }
    fn tv_m1(&self, m: usize) -> usize {
        1 + self.n + m
    }
    fn t_1i(&self, i: usize) -> usize {
        1 + 2 * self.n + i
    }
    fn t_mi(&self, m: usize, i: usize) -> usize {
        1 + 3 * self.n + m * self.n + i
    }
    fn tv_mi(&self, m: usize, i: usize) -> usize {
        1 + 3 * self.n + self.n * self.n + m * self.n + i
    }
    fn t_1vi(&self, i: usize) -> usize {
        1 + 3 * self.n + 2 * self.n * self.n + i
    }
    fn t_mvi(&self, m: usize, i: usize) -> usize {
        1 + 4 * self.n + 2 * self.n * self.n + m * self.n + i
    }
    fn tvv_mi(&self, m: usize, i: usize) -> usize {
        1 + 4 * self.n + 3 * self.n * self.n + m * self.n + i
    }
    fn e_mi(&self, m: usize, i: usize) -> usize {
        1 + 4 * self.n + 4 * self.n * self.n + m * self.n + i
    }

    fn fill(&self, f: &Frame, se: &StressEnergy) -> Vec<f64> {
        let n = self.n;
        let g_inv = &f.metric.g_inv;
        let h11 = f.temporal.h11;
        let mut out = vec![0.0; self.len()];
        out[self.t11()] = se.t_up1_down1;
        for m in 0..n {
            out[self.t_m1(m)] = se.t_up_m_down1[m];
            out[self.tv_m1(m)] = se.t_vert_m_down1[m];
            out[self.t_1i(m)] = se.t_up1_down_i[m];
            out[self.t_1vi(m)] = se.t_up1_vert_i[m];
            for i in 0..n {
                let mut raised = 0.0;
                let mut raised_v = 0.0;
                for r in 0..n {
                    raised += g_inv[[m, r]] * se.t_ij[[r, i]];
                    raised_v += h11 * g_inv[[m, r]] * se.t_vv[[r, i]];
                }
                out[self.t_mi(m, i)] = raised;
                out[self.tvv_mi(m, i)] = raised_v;
                out[self.tv_mi(m, i)] = se.t_vert_m_down_i[[m, i]];
                out[self.t_mvi(m, i)] = se.t_up_m_vert_i[[m, i]];
                out[self.e_mi(m, i)] = se.e_mixed[[m, i]];
            }
        }
        out
    }
}

pub fn conservation_residuals(cfg: &GeometryConfig, p: &JetPoint) -> Result<ConservationResiduals> {
    conservation_residuals_with(cfg, p, &OracleSchemes::default().conservation)
}

/// Evaluates the three conservation laws term by term. Field derivatives
/// along `t`, `x` and `y` are central differences of the closed-form
/// stress-energy fields; connection coefficients are closed form.
pub fn conservation_residuals_with(
    cfg: &GeometryConfig,
    p: &JetPoint,
    scheme: &DiffScheme,
) -> Result<ConservationResiduals> {
    let n = cfg.n();
    let nf = n as f64;
    let k = cfg.einstein_k();
    let layout = FieldLayout { n };
    let f = Frame::new(cfg, p)?;
    let se = stress_energy_at(&f, k);
    let v = layout.fill(&f, &se);
    let d = all_partials(scheme, p, |q| {
        let fq = Frame::new(cfg, q)?;
        Ok(layout.fill(&fq, &stress_energy_at(&fq, k)))
    })?;
    // d[0] = ∂_t, d[1 + m] = ∂_{x^m}, d[1 + n + m] = ∂_{y^m}
    let b = cartan_at(&f);
    let nl = nonlinear_at(&f);
    let kappa = f.temporal.kappa;
    let y = &f.y;
    let dt = |idx: usize| d[0][idx] + kappa * (0..n).map(|q| y[q] * d[1 + n + q][idx]).sum::<f64>();
    let dx = |m: usize, idx: usize| d[1 + m][idx] - (0..n).map(|q| nl.n[[q, m]] * d[1 + n + q][idx]).sum::<f64>();
    let dy = |m: usize, idx: usize| d[1 + n + m][idx];
    let l_trace: Vec<f64> = (0..n).map(|r| (0..n).map(|m| b.l[[m, r, m]]).sum()).collect();
    let c_trace: Vec<f64> = (0..n).map(|r| (0..n).map(|m| b.c[[m, r, m]]).sum()).collect();

    let mut first = dt(layout.t11());
    for m in 0..n {
        first += dx(m, layout.t_m1(m)) + dy(m, layout.tv_m1(m));
    }
    for r in 0..n {
        first += v[layout.t_m1(r)] * l_trace[r] + v[layout.tv_m1(r)] * c_trace[r];
    }

    let mut second = 0.0f64;
    let mut third = 0.0f64;
    let f_sig = &f.sigma_grad;
    for i in 0..n {
        // T^1_{i/1} with G^r_{i1} = b.g_j1[[r, i]]
        let mut lhs2 = dt(layout.t_1i(i)) + v[layout.t_1i(i)] * kappa;
        for r in 0..n {
            lhs2 -= v[layout.t_1i(r)] * b.g_j1[[r, i]];
        }
        let mut rhs2 = 0.0;
        let mut lhs3 = dt(layout.t_1vi(i)) + 2.0 * v[layout.t_1vi(i)] * kappa;
        for m in 0..n {
            lhs2 += dx(m, layout.t_mi(m, i)) + dy(m, layout.tv_mi(m, i));
            lhs3 += dx(m, layout.t_mvi(m, i)) + dy(m, layout.tvv_mi(m, i));
            rhs2 += dx(m, layout.e_mi(m, i)) + nf * v[layout.e_mi(m, i)] * f_sig[m];
            for r in 0..n {
                lhs2 -= v[layout.t_mi(m, r)] * b.l[[r, i, m]];
                lhs2 -= v[layout.tv_mi(m, r)] * b.c[[r, i, m]];
                lhs3 -= v[layout.t_mvi(m, r)] * b.l[[r, i, m]];
                lhs3 -= v[layout.tvv_mi(m, r)] * b.c[[r, i, m]];
            }
        }
        for r in 0..n {
            lhs2 += v[layout.t_mi(r, i)] * l_trace[r] + v[layout.tv_mi(r, i)] * c_trace[r];
            lhs3 += v[layout.t_mvi(r, i)] * l_trace[r] + v[layout.tvv_mi(r, i)] * c_trace[r];
        }
        rhs2 -= nf * v[layout.e_mi(i, i)] * f_sig[i];

        let y11 = y11_at(&f);
        let dy11: f64 = (0..n).filter(|q| *q != i).map(|q| f.sigma_hess[[i, q]] * y[q]).sum();
        let rhs3 = 2.0 * f.conformal_inv / k * (nf * dy11 - 2.0 * y11 / y[i]);

        second = second.max((lhs2 - rhs2).abs());
        third = third.max((lhs3 - rhs3).abs());
    }
    Ok(ConservationResiduals {
        first: first.abs(),
        second,
        third,
        scale: v.iter().fold(1.0f64, |s, x| s.max(x.abs())),
    })
}

/// `F^{(1)}_{(i)j} = (h^{11}/2)[g_jm N^{(m)}_i − g_im N^{(m)}_j + (g_ir L^r_jm − g_jr L^r_im)y^m]`,
/// full summation over `m` and `r`.
pub fn em_tensor(cfg: &GeometryConfig, p: &JetPoint) -> Result<Array2<f64>> {
    Ok(em_tensor_at(&Frame::new(cfg, p)?))
}

pub fn em_tensor_at(f: &Frame) -> Array2<f64> {
    let n = f.n;
    let g = &f.metric.g;
    let nl = nonlinear_at(f).n;
    let l = crate::connection::cartan_l(n, &f.sigma_grad);
    Array2::from_shape_fn((n, n), |(i, j)| {
        let mut v = 0.0;
        for m in 0..n {
            v += g[[j, m]] * nl[[m, i]] - g[[i, m]] * nl[[m, j]];
            for r in 0..n {
                v += (g[[i, r]] * l[[r, j, m]] - g[[j, r]] * l[[r, i, m]]) * f.y[m];
            }
        }
        0.5 * f.temporal.h11_inv * v
    })
}
