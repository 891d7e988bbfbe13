use std::sync::Arc;

use proptest::prelude::*;

use musielak::calculus::morrey_modulus;
use musielak::exprlang::{BinOp, Constant, Func};
use musielak::modular::{luxemburg_norm, GridFunction};
use musielak::{parse, Domain, DoublePhase, Expr, Model, NFunctionExt, VariableExponent};

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0.0f64..1e3).prop_map(Expr::Literal),
        (0u32..50).prop_map(|v| Expr::Literal(v as f64)),
        (1usize..=4).prop_map(Expr::Var),
        Just(Expr::Param),
        Just(Expr::Const(Constant::Pi)),
        Just(Expr::Const(Constant::E)),
        Just(Expr::Call(Func::Norm, vec![])),
    ]
}

fn tree() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(5, 48, 2, |inner| {
        let ops = prop_oneof![
            Just(BinOp::Add),
            Just(BinOp::Sub),
            Just(BinOp::Mul),
            Just(BinOp::Div),
            Just(BinOp::Pow),
        ];
        let unary = prop_oneof![
            Just(Func::Sin),
            Just(Func::Exp),
            Just(Func::Log),
            Just(Func::Sqrt),
            Just(Func::Abs),
        ];
        let binary = prop_oneof![Just(Func::Min), Just(Func::Max), Just(Func::Pow)];
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (ops, inner.clone(), inner.clone())
                .prop_map(|(op, l, r)| Expr::Binary(op, Box::new(l), Box::new(r))),
            (unary, inner.clone()).prop_map(|(f, a)| Expr::Call(f, vec![a])),
            (binary, inner.clone(), inner).prop_map(|(f, a, b)| Expr::Call(f, vec![a, b])),
        ]
    })
}

fn unit() -> Domain<f64> {
    Domain::unit(2).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printed_expressions_parse_back(e in tree()) {
        let text = e.to_string();
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &e, "{}", text);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn spacing_does_not_matter(e in tree()) {
        let text = e.to_string();
        let squeezed: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        prop_assert_eq!(parse(&squeezed).unwrap(), e);
    }

    #[test]
    fn derivative_brackets(p in 1.2f64..6.0, log_t in -3.0f64..3.0, x1 in 0.0f64..1.0, x2 in 0.0f64..1.0) {
        let m = VariableExponent::<f64>::any_growth(
            parse(&format!("{p} + 0.3*x1*x2")).unwrap(),
            unit(),
        ).unwrap();
        let (x, t) = ([x1, x2], 10f64.powf(log_t));
        let a = m.eval(&x, t).unwrap();
        let at = m.derivative(&x, t).unwrap() * t;
        let a2 = m.eval(&x, 2.0 * t).unwrap();
        prop_assert!(a <= at * (1.0 + 1e-12) && at <= a2 * (1.0 + 1e-12));
    }

    #[test]
    fn young_inequality(
        alpha in 0.0f64..3.0,
        log_t in -2.0f64..2.0,
        log_s in -2.0f64..2.0,
        x1 in 0.0f64..1.0,
    ) {
        let m = DoublePhase::<f64>::new(3.0, 4.0, Expr::Literal(alpha), unit()).unwrap();
        let x = [x1, 0.5];
        let (t, s) = (10f64.powf(log_t), 10f64.powf(log_s));
        let lhs = s * t;
        let rhs = m.eval(&x, t).unwrap() + m.conjugate(&x, s).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-10));
        let a = m.derivative(&x, t).unwrap();
        let eq = m.eval(&x, t).unwrap() + m.conjugate(&x, a).unwrap();
        prop_assert!((eq - a * t).abs() <= 1e-8 * a * t);
    }

    #[test]
    fn inverse_round_trip(p in 2.1f64..6.0, log_y in -8.0f64..8.0) {
        let m = VariableExponent::<f64>::constant(p, unit()).unwrap();
        let x = [0.5, 0.5];
        let y = 10f64.powf(log_y);
        let t = m.inverse(&x, y).unwrap();
        prop_assert!((m.eval(&x, t).unwrap() - y).abs() <= 1e-12 * y);
    }

    #[test]
    fn norm_is_homogeneous(values in prop::collection::vec(-5.0f64..5.0, 16), alpha in -4.0f64..4.0) {
        let m: Model<f64> = Arc::new(VariableExponent::constant(3.0, unit()).unwrap());
        let u = GridFunction::new(unit(), 4, values).unwrap();
        let nu = luxemburg_norm(m.as_ref(), &u, 1e-12).unwrap();
        let ns = luxemburg_norm(m.as_ref(), &u.scale(alpha).unwrap(), 1e-12).unwrap();
        prop_assert!((ns - alpha.abs() * nu).abs() <= 1e-9 * (1.0 + nu * alpha.abs()));
    }

    #[test]
    fn modulus_is_increasing_and_scales(p in 2.5f64..6.0, s in 0.01f64..1.0) {
        let m = VariableExponent::<f64>::constant(p, unit()).unwrap();
        let x = [0.5, 0.5];
        let mu = morrey_modulus(&m, &x, s, 1e-11).unwrap().value;
        let mu2 = morrey_modulus(&m, &x, 2.0 * s, 1e-11).unwrap().value;
        prop_assert!(mu2 > mu);
        let expected = 2f64.powf(1.0 - 2.0 / p);
        prop_assert!((mu2 / mu - expected).abs() <= 1e-8 * expected);
    }
}

#[test]
fn f32_aliases_agree_with_f64() {
    let m32 = VariableExponent::<f32>::constant(4.0, Domain::unit(2).unwrap()).unwrap();
    let m64 = VariableExponent::<f64>::constant(4.0, unit()).unwrap();
    for t in [0.1f32, 1.0, 3.0] {
        let a = m32.eval(&[0.5, 0.5], t).unwrap() as f64;
        let b = m64.eval(&[0.5, 0.5], t as f64).unwrap();
        assert!((a - b).abs() <= 1e-6 * b.max(1.0));
    }
}
