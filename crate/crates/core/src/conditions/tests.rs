use std::sync::Arc;

use super::*;
use crate::exprlang::parse;
use crate::nfunction::{Custom, Domain, DoublePhase, Model, VariableExponent};

fn square() -> Domain<f64> {
    Domain::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap()
}

fn unit() -> Domain<f64> {
    Domain::unit(2).unwrap()
}

fn ve(p: &str, d: Domain<f64>) -> Model<f64> {
    Arc::new(VariableExponent::any_growth(parse(p).unwrap(), d).unwrap())
}

#[test]
fn delta2_variable_exponent() {
    let m = ve("3.5 + 0.5*x1", square());
    let r = check_delta2(m.as_ref(), false).unwrap();
    assert!(r.passed);
    let k = r.constant("K").unwrap();
    assert!((k / 16.0 - 1.0).abs() < 0.05, "{k}");
    let w = &r.witnesses[0];
    assert!((w.lhs - w.rhs).abs() <= 1e-12 * w.rhs);
}

#[test]
fn delta2_double_phase() {
    let m = DoublePhase::new(3.0, 4.0, parse("1").unwrap(), square()).unwrap();
    let r = check_delta2(&m, false).unwrap();
    assert!(r.passed);
    let k = r.constant("K").unwrap();
    assert!(k <= 16.0 && k > 16.0 * 0.95, "{k}");
}

#[test]
fn delta2_exponential_fails() {
    let m = Custom::new(parse("exp(t) - t - 1").unwrap(), square()).unwrap();
    assert!(!check_delta2(&m, false).unwrap().passed);
    let near = check_delta2(&m, true).unwrap();
    assert!(!near.passed);
    assert_eq!(near.condition, ConditionId::Delta2NearInfinity);
}

#[test]
fn delta2_near_infinity_threshold() {
    let m = ve("4", square());
    let r = check_delta2(m.as_ref(), true).unwrap();
    assert!(r.passed);
    assert_eq!(r.constant("t0"), Some(1.0));
}

#[test]
fn p3_examples() {
    let x = [0.5, 0.5];
    assert!(check_p3(ve("1.5", unit()).as_ref(), &x).unwrap().passed);
    assert!(!check_p3(ve("4", unit()).as_ref(), &x).unwrap().passed);
    assert!(!check_p3(ve("2", unit()).as_ref(), &x).unwrap().passed);
}

#[test]
fn p5_examples() {
    let constant = check_p5(ve("4", square()).as_ref()).unwrap();
    assert!(constant.passed);
    assert_eq!(constant.constant("C0"), Some(0.0));
    let smooth = check_p5(ve("4 + 0.5*sin(x1)", square()).as_ref()).unwrap();
    assert!(smooth.passed, "{smooth:?}");
    let delta = smooth.constant("delta0").unwrap();
    assert!(delta < 0.5);
    let dp = DoublePhase::new(3.0, 4.0, parse("1 + x1^2").unwrap(), square()).unwrap();
    assert!(check_p5(&dp).unwrap().passed);
}

#[test]
fn p5_tilde_examples() {
    let m = ve("4 + 0.5*sin(x1)", square());
    assert!(check_p5_tilde(&m).unwrap().passed);
    let c = check_p5_tilde(&ve("4", square())).unwrap();
    assert!(c.passed && c.constant("C_tilde") == Some(0.0));
    let dp: Model<f64> =
        Arc::new(DoublePhase::new(3.0, 4.0, parse("1 + x1^2").unwrap(), square()).unwrap());
    assert!(check_p5_tilde(&dp).unwrap().passed);
}

#[test]
fn p5_star_examples() {
    let c = check_p5_star(ve("1.5", unit()).as_ref()).unwrap();
    assert!(c.passed);
    assert!(c.constant("C_star").unwrap() < 1e-6);
    let v = check_p5_star(ve("1.5 + 0.2*x1", unit()).as_ref()).unwrap();
    assert!(v.passed, "{v:?}");
    assert!(matches!(
        check_p5_star(ve("4", unit()).as_ref()),
        Err(crate::Error::P3Violation { .. })
    ));
}

#[test]
fn p5_star_flags_missing_delta2() {
    let m = Custom::new(parse("t^1.5*exp(t)").unwrap(), unit()).unwrap();
    let r = check_p5_star(&m).unwrap();
    assert!(r.notes.iter().any(|n| n.contains("hypothesis unmet")), "{r:?}");
}

#[test]
fn much_less_than_examples() {
    let d = square();
    let a = Custom::new(parse("t^3").unwrap(), d.clone()).unwrap();
    let b = Custom::new(parse("t^4").unwrap(), d.clone()).unwrap();
    assert!(check_much_less_than(&a, &b, &[10.0]).unwrap().passed);
    assert!(!check_much_less_than(&a, &a, &[1.0]).unwrap().passed);
    assert!(!check_much_less_than(&b, &a, &[1.0]).unwrap().passed);
    let pa = ve("3", d.clone());
    let pb = ve("4", d);
    assert!(check_much_less_than(pa.as_ref(), pb.as_ref(), &[1.0, 10.0]).unwrap().passed);
}

#[test]
fn young_relations_hold() {
    let fams: Vec<Model<f64>> = vec![
        ve("2", square()),
        ve("4 + 0.5*sin(x1)", square()),
        Arc::new(crate::nfunction::LogType::new(parse("3 + 0.5*x2").unwrap(), square()).unwrap()),
        Arc::new(DoublePhase::new(3.0, 4.0, parse("1 + x1^2").unwrap(), square()).unwrap()),
    ];
    for m in fams {
        let r = verify_young_relations(m.as_ref(), 300, 7).unwrap();
        assert!(r.passed, "{r:?}");
    }
}

#[test]
fn young_equality_spot_value() {
    let m = ve("4", square());
    let r = verify_young_relations(m.as_ref(), 50, 1).unwrap();
    assert!(r.constant("worst_equality_gap").unwrap() < 1e-12);
}

#[test]
fn reports_are_deterministic() {
    let m = ve("4 + 0.5*sin(x1)", square());
    let a = serde_json::to_string(&verify_young_relations(m.as_ref(), 100, 42).unwrap()).unwrap();
    let b = serde_json::to_string(&verify_young_relations(m.as_ref(), 100, 42).unwrap()).unwrap();
    assert_eq!(a, b);
    let keys: Vec<&str> = ["\"condition\"", "\"passed\"", "\"constants\"", "\"witnesses\"", "\"grid\""]
        .to_vec();
    let pos: Vec<usize> = keys.iter().map(|k| a.find(k).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn delta_candidates_stay_below_inverse_dimension() {
    for n in 2..5 {
        let d = delta_candidates(n);
        assert_eq!(d.len(), 10);
        assert!(d.iter().all(|&v| v > 0.0 && v < 1.0 / n as f64));
    }
}
