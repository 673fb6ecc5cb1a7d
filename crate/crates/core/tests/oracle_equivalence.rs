use bmjet::cli::sampling::Sampler;
use bmjet::cli::verify::{check_table, point_deviations};
use bmjet::curvature::curvature_tensors;
use bmjet::geometry::{GeometryConfig, JetPoint};
use bmjet::oracle::{oracle_curvatures, tensoriality_residual, JetDiffeo, OracleSchemes};

fn pt(t: f64, x: &[f64], y: &[f64]) -> JetPoint {
    JetPoint::new(t, x.to_vec(), y.to_vec())
}

#[test]
fn curvature_oracle_examples() {
    let s = OracleSchemes::default().first_level;
    let cfg = GeometryConfig::new(3, "x1*x2", "1", 1.0).unwrap();
    let p = pt(0.0, &[0.0; 3], &[1.0; 3]);
    let oc = oracle_curvatures(&cfg, &p, &s).unwrap();
    let cb = curvature_tensors(&cfg, &p).unwrap();
    assert!((oc.torsion_r[[0, 0, 1]] - 3.0).abs() < 1e-4);
    for (a, b) in oc.r_curv.iter().zip(&cb.r_curv) {
        assert!((a - b).abs() < 1e-5);
    }
    for (a, b) in oc.s_curv.iter().zip(&cb.s_curv) {
        assert!((a - b).abs() < 1e-4);
    }
    assert!((oc.ricci_r[[0, 1]] + 2.0).abs() < 1e-5);
    assert!((oc.scalar_curvature + 14.0).abs() < 1e-5);
}

#[test]
fn tensoriality_examples() {
    let s = OracleSchemes::default().first_level;
    let p = pt(0.6, &[0.3, -0.2, 0.1], &[1.5, -0.5, -2.0]);
    let cfg = GeometryConfig::new(3, "x1", "1", 1.0).unwrap();
    let r = tensoriality_residual(&cfg, &JetDiffeo::new(1.0, 0.0, vec![2.0, 1.0, 1.0]).unwrap(), &p, &s).unwrap();
    assert!(r <= 1e-4, "{r}");
    let cfg = GeometryConfig::new(3, "0", "1", 1.0).unwrap();
    let r = tensoriality_residual(&cfg, &JetDiffeo::new(2.0, 0.0, vec![1.0; 3]).unwrap(), &p, &s).unwrap();
    assert!(r <= 1e-4, "{r}");
}

#[test]
fn every_check_holds_on_a_mixed_configuration() {
    let cfg = GeometryConfig::new(4, "sin(x1)*x2 + x3^2 - 0.5*x4", "1 + t^2", 2.0).unwrap();
    let schemes = OracleSchemes::default();
    let table = check_table();
    for p in Sampler::new(4, 11).points(25) {
        let devs = point_deviations(&cfg, &p, &schemes).unwrap();
        for d in &table {
            assert!(devs[d.name] <= d.tol, "{} = {:e} at {p:?}", d.name, devs[d.name]);
        }
    }
}
