use bmjet::geodesic::{el_residual, integrate, GeodesicProblem};
use bmjet::geometry::GeometryConfig;

fn problem(sigma: &str, h11: &str, x0: &[f64], y0: &[f64], steps: usize) -> GeodesicProblem {
    GeodesicProblem {
        cfg: GeometryConfig::new(y0.len(), sigma, h11, 1.0).unwrap(),
        t0: 0.0,
        t1: 1.0,
        x0: x0.to_vec(),
        y0: y0.to_vec(),
        steps,
    }
}

fn final_x(p: &GeodesicProblem) -> Vec<f64> {
    integrate(p).unwrap().samples.last().unwrap().x.clone()
}

fn error_vs(reference: &[f64], x: &[f64]) -> f64 {
    reference.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[test]
fn rk4_converges_at_fourth_order() {
    for (sigma, h11) in [("x1*x2", "exp(2*t)"), ("sin(x1) + x2*x3", "1 + t^2")] {
        let mk = |steps| problem(sigma, h11, &[0.1, -0.2, 0.3], &[0.8, 1.2, 0.9], steps);
        let reference = final_x(&mk(400));
        let e1 = error_vs(&reference, &final_x(&mk(20)));
        let e2 = error_vs(&reference, &final_x(&mk(40)));
        let order = (e1 / e2).log2();
        assert!(order >= 3.5, "{sigma}: order {order}");
    }
}

#[test]
fn flat_flow_keeps_velocity_constant() {
    let p = problem("0", "1", &[0.5, -0.5, 1.0], &[-1.0, -3.0, 0.25], 50);
    let traj = integrate(&p).unwrap();
    for s in &traj.samples {
        assert_eq!(s.y, vec![-1.0, -3.0, 0.25]);
    }
    let last = traj.samples.last().unwrap();
    for i in 0..3 {
        assert!((last.x[i] - (p.x0[i] + p.y0[i])).abs() <= 1e-10);
    }
    assert!(el_residual(&p, &traj).unwrap() <= 1e-10);
}

#[test]
fn temporal_metric_accelerates_uniformly() {
    // with σ = 0 and κ = 1 the flow is y(t) = y0·eᵗ
    let p = problem("0", "exp(2*t)", &[0.0; 3], &[1.0, 2.0, 0.5], 200);
    let last = integrate(&p).unwrap().samples.last().unwrap().clone();
    for i in 0..3 {
        assert!((last.y[i] - p.y0[i] * 1f64.exp()).abs() < 1e-9);
        assert!((last.x[i] - p.y0[i] * (1f64.exp() - 1.0)).abs() < 1e-9);
    }
}

#[test]
fn el_residual_within_budget() {
    let p = problem("x1", "1", &[0.0; 3], &[0.5, 1.0, 2.0], 1000);
    let traj = integrate(&p).unwrap();
    let monotone = traj.samples.windows(2).all(|w| w[1].x[0] > w[0].x[0] && w[1].y[0] < w[0].y[0]);
    assert!(monotone);
    assert!(el_residual(&p, &traj).unwrap() <= 1e-5);
}
