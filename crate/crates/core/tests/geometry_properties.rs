use bmjet::connection::{cartan, nonlinear_y_derivative, torsions};
use bmjet::curvature::{covariant_c_derivative, curvature_tensors, einstein_blocks, em_tensor};
use bmjet::geometry::{fstar_squared, metric, Frame, GeometryConfig, JetPoint};
use bmjet::oracle::{oracle_cartan, oracle_metric, oracle_nonlinear, scaled_deviation, DiffScheme, MetricSource, OracleSchemes};
use ndarray::Array2;
use proptest::prelude::*;

const SIGMAS: [&str; 5] = ["0", "x1", "x1*x2", "sin(x1) + x2^2", "exp(x1)*cos(x2) - x1*x2"];
const H11: [&str; 3] = ["1", "exp(2*t)", "1 + t^2"];

/// `n ∈ 2..=6`, `|yⁱ|` log-uniform on `[0.1, 10]` with signs flipped in pairs.
fn setup() -> impl Strategy<Value = (GeometryConfig, JetPoint)> {
    (2usize..=6).prop_flat_map(|n| {
        (
            prop::sample::select(SIGMAS.to_vec()),
            prop::sample::select(H11.to_vec()),
            0.0f64..1.0,
            prop::collection::vec(-1.0f64..1.0, n),
            prop::collection::vec(-10f64.ln()..10f64.ln(), n),
            prop::collection::vec(any::<bool>(), n / 2),
        )
            .prop_map(move |(s, h, t, x, logy, flips)| {
                let mut y: Vec<f64> = logy.iter().map(|v| v.exp()).collect();
                for (k, flip) in flips.iter().enumerate() {
                    if *flip {
                        y[2 * k] = -y[2 * k];
                        y[2 * k + 1] = -y[2 * k + 1];
                    }
                }
                (GeometryConfig::new(n, s, h, 1.0).unwrap(), JetPoint::new(t, x, y))
            })
    })
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 128,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn metric_invariants((cfg, p) in setup()) {
        let n = cfg.n();
        let m = metric(&cfg, &p).unwrap();
        let prod = m.g.dot(&m.g_inv) - Array2::<f64>::eye(n);
        prop_assert!(prod.iter().all(|v| v.abs() <= 1e-10));
        let quad: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| m.g[[i, j]] * p.y[i] * p.y[j]).sum();
        let target = cfg.h11_value(p.t).unwrap() * fstar_squared(&cfg, &p).unwrap();
        prop_assert!((quad - target).abs() <= 1e-10 * target.abs().max(1.0));
        for lam in [0.5, 2.0, 10.0] {
            let q = JetPoint::new(p.t, p.x.clone(), p.y.iter().map(|v| lam * v).collect());
            prop_assert!(scaled_deviation(&metric(&cfg, &q).unwrap().g, &m.g) <= 1e-12);
        }
        let og = oracle_metric(&cfg, &p, &OracleSchemes::default().first_level).unwrap();
        prop_assert!(scaled_deviation(&og, &m.g) <= 1e-5);
    }

    #[test]
    fn connection_invariants((cfg, p) in setup()) {
        let n = cfg.n();
        let b = cartan(&cfg, &p).unwrap();
        let s = OracleSchemes::default();
        for i in 0..n {
            prop_assert_eq!(b.m[i], 2.0 * b.h[i]);
            for j in 0..n {
                if i != j {
                    prop_assert_eq!(b.n[[i, j]], 0.0);
                }
            }
        }
        prop_assert!(scaled_deviation(&oracle_nonlinear(&cfg, &p, &s.second_level).unwrap(), &b.n) <= 1e-5);
        let oc = oracle_cartan(&cfg, &p, &s.first_level, MetricSource::ClosedForm).unwrap();
        prop_assert!(scaled_deviation(&oc.l, &b.l) <= 1e-5);
        prop_assert!(scaled_deviation(&oc.c, &b.c) <= 1e-5);
        let t = torsions(&cfg, &p).unwrap();
        for ((r, i, j), v) in t.r.indexed_iter() {
            prop_assert_eq!(*v, -t.r[[r, j, i]]);
        }
        let f = Frame::new(&cfg, &p).unwrap();
        let p_nl = nonlinear_y_derivative(&f) - &b.l;
        prop_assert!(p_nl.iter().all(|v| v.abs() <= 1e-12 * b.l.iter().fold(1.0f64, |m, v| m.max(v.abs()))));
    }

    #[test]
    fn curvature_invariants((cfg, p) in setup()) {
        let n = cfg.n();
        let c = curvature_tensors(&cfg, &p).unwrap();
        let scale = |a: &ndarray::Array4<f64>| a.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (name, a) in [("R", &c.r_curv), ("S", &c.s_curv)] {
            let sc = scale(a);
            for ((l, i, j, k), v) in a.indexed_iter() {
                prop_assert!((v + a[[l, i, k, j]]).abs() <= 1e-12 * sc, "{name} not antisymmetric");
            }
        }
        let cov = covariant_c_derivative(&cfg, &p).unwrap();
        let sc = scale(&cov).max(scale(&c.p_curv));
        for ((l, i, j, k), v) in c.p_curv.indexed_iter() {
            prop_assert!((v + cov[[l, i, k, j]]).abs() <= 1e-12 * sc);
        }
        for i in 0..n {
            for k in 0..n {
                let tr: f64 = (0..n).map(|m| cov[[m, i, k, m]]).sum();
                prop_assert!(tr.abs() <= 1e-10 * sc);
            }
        }
        let e = einstein_blocks(&cfg, &p).unwrap();
        let h11 = cfg.h11_value(p.t).unwrap();
        prop_assert!((e.tt + 0.5 * c.scalar_curvature * h11).abs() <= 1e-10 * e.tt.abs().max(1.0));
        prop_assert!(em_tensor(&cfg, &p).unwrap().iter().all(|v| v.abs() <= 1e-10));
    }
}

/// Observed order of a step-halving sequence `eps, eps/2, eps/4`.
fn observed_order(f: impl Fn(f64) -> Vec<f64>, eps: f64) -> f64 {
    let (a, b, c) = (f(eps), f(eps / 2.0), f(eps / 4.0));
    let d1 = a.iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    let d2 = b.iter().zip(&c).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
    (d1 / d2).log2()
}

#[test]
fn oracle_differences_converge_at_second_order() {
    let cfg = GeometryConfig::new(3, "sin(x1) + x2*x3", "exp(2*t)", 1.0).unwrap();
    let p = JetPoint::new(0.3, vec![0.2, -0.4, 0.5], vec![0.8, 1.7, 1.3]);
    let metric_order = observed_order(
        |e| oracle_metric(&cfg, &p, &DiffScheme::default().with_steps(e, e)).unwrap().into_raw_vec_and_offset().0,
        1e-2,
    );
    assert!(metric_order >= 1.8, "metric order {metric_order}");
    let c_order = observed_order(
        |e| {
            oracle_cartan(&cfg, &p, &DiffScheme::default().with_steps(e, e), MetricSource::ClosedForm)
                .unwrap()
                .c
                .into_raw_vec_and_offset()
                .0
        },
        1e-2,
    );
    assert!(c_order >= 1.8, "C order {c_order}");
}
