//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! non-zero when any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use musielak::calculus::morrey_modulus;
use musielak::conditions::{
    check_delta2, check_p5, check_p5_star, check_p5_tilde, p3_holds_everywhere,
    verify_young_relations,
};
use musielak::exprlang::{BinOp, Constant, Func};
use musielak::modular::{luxemburg_norm, sample, GridFunction};
use musielak::morrey::{reference_constant, MorreyOptions, MorreyVerifier};
use musielak::{
    parse, Conjugate, Custom, Domain, DoublePhase, Expr, LogType, Model, NFunctionExt,
    VariableExponent,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn unit() -> Domain<f64> {
    Domain::unit(2).unwrap()
}

fn expr(src: &str) -> Expr {
    parse(src).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn power(p: f64) -> Model<f64> {
    Arc::new(VariableExponent::constant(p, unit()).unwrap())
}

fn builtin_families() -> Vec<(&'static str, Model<f64>)> {
    vec![
        (
            "variable-exponent 4 + 0.5*sin(x1)",
            Arc::new(VariableExponent::new(expr("4 + 0.5*sin(x1)"), unit()).unwrap()),
        ),
        (
            "log-type 3.5 + 0.5*x2",
            Arc::new(LogType::new(expr("3.5 + 0.5*x2"), unit()).unwrap()),
        ),
        (
            "double-phase 3, 4, 1 + x1^2",
            Arc::new(DoublePhase::new(3.0, 4.0, expr("1 + x1^2"), unit()).unwrap()),
        ),
    ]
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed(limit: Duration, start: Instant) -> Result<Duration, String> {
    let dt = start.elapsed();
    ensure(dt < limit, || format!("took {dt:.2?}, limit {limit:?}"))?;
    Ok(dt)
}

fn closed_form_modulus() -> Outcome {
    let start = Instant::now();
    let x = [0.5, 0.5];
    let mut worst = 0.0f64;
    for p in [3.0, 4.0, 6.0] {
        let m = power(p);
        for s in [0.01, 0.1, 0.25, 0.5, 1.0] {
            let mu = morrey_modulus(m.as_ref(), &x, s, 1e-10)
                .map_err(|e| e.to_string())?
                .value;
            let exact = 2.0 * p / (p - 2.0) * p.powf(1.0 / p) * s.powf(1.0 - 2.0 / p);
            let r = rel(mu, exact);
            worst = worst.max(r);
            ensure(r <= 1e-6, || format!("p={p}, s={s}: {mu} vs {exact}"))?;
        }
    }
    let spot = morrey_modulus(power(4.0).as_ref(), &x, 0.5, 1e-12)
        .map_err(|e| e.to_string())?
        .value;
    ensure(rel(spot, 4.0) <= 1e-12, || format!("mu(p=4, s=0.5) = {spot}"))?;
    let dt = timed(Duration::from_secs(1), start)?;
    Ok(format!("worst relative error {worst:.1e}, mu(4, 0.5) = {spot}, {dt:.2?}"))
}

fn young_suite() -> Outcome {
    let start = Instant::now();
    let mut margins = Vec::new();
    for (seed, (name, m)) in builtin_families().into_iter().enumerate() {
        let r = verify_young_relations(m.as_ref(), 10_000, seed as u64).map_err(|e| e.to_string())?;
        ensure(r.passed, || format!("{name}: {:?}", r.constants))?;
        margins.push(r.constant("worst_equality_gap").unwrap_or(f64::NAN));
    }
    let dt = timed(Duration::from_secs(10), start)?;
    let gaps: Vec<String> = margins.iter().map(|g| format!("{g:.1e}")).collect();
    Ok(format!("3 families x 1e4 samples, equality gaps [{}], {dt:.2?}", gaps.join(", ")))
}

fn conjugation_oracle() -> Outcome {
    let m = power(4.0);
    let conj: Model<f64> = Arc::new(Conjugate::numeric(m.clone()));
    let back: Model<f64> = Arc::new(Conjugate::numeric(conj.clone()));
    let x = [0.3, 0.7];
    let mut worst = 0.0f64;
    let mut worst_back = 0.0f64;
    for k in 0..=80 {
        let s = 10f64.powf(-2.0 + k as f64 / 20.0);
        let got = conj.eval(&x, s).map_err(|e| e.to_string())?;
        let exact = 0.75 * s.powf(4.0 / 3.0);
        worst = worst.max(rel(got, exact));
        let a = back.eval(&x, s).map_err(|e| e.to_string())?;
        worst_back = worst_back.max(rel(a, s.powi(4) / 4.0));
    }
    ensure(worst <= 1e-8, || format!("conjugate off by {worst:e}"))?;
    ensure(worst_back <= 1e-6, || format!("double conjugate off by {worst_back:e}"))?;
    Ok(format!("conjugate {worst:.1e}, double conjugate {worst_back:.1e} on [0.01, 100]"))
}

fn random_grid(rng: &mut ChaCha8Rng, m: usize) -> GridFunction<f64> {
    let scale = 10f64.powf(rng.random_range(-1.0..1.0));
    let values = (0..m * m).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
    GridFunction::new(unit(), m, values).unwrap()
}

fn luxemburg_oracle() -> Outcome {
    let tol = 1e-12;
    for p in [3.0, 4.0] {
        let m = power(p);
        for c in [0.5, 1.0, 2.0] {
            let u = GridFunction::new(unit(), 16, vec![c; 256]).unwrap();
            let norm = luxemburg_norm(m.as_ref(), &u, tol).map_err(|e| e.to_string())?;
            let exact = c * p.powf(-1.0 / p);
            ensure((norm - exact).abs() <= 1e-6, || format!("p={p}, c={c}: {norm} vs {exact}"))?;
        }
    }
    let m = power(4.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_h = 0.0f64;
    let mut worst_t = f64::NEG_INFINITY;
    for _ in 0..500 {
        let u = random_grid(&mut rng, 8);
        let v = random_grid(&mut rng, 8);
        let alpha = rng.random_range(-5.0..5.0);
        let nu = luxemburg_norm(m.as_ref(), &u, tol).map_err(|e| e.to_string())?;
        let nv = luxemburg_norm(m.as_ref(), &v, tol).map_err(|e| e.to_string())?;
        let scaled = u.scale(alpha).map_err(|e| e.to_string())?;
        let ns = luxemburg_norm(m.as_ref(), &scaled, tol).map_err(|e| e.to_string())?;
        let sum = u.add(&v).map_err(|e| e.to_string())?;
        let nsum = luxemburg_norm(m.as_ref(), &sum, tol).map_err(|e| e.to_string())?;
        let h = rel(ns, alpha.abs() * nu);
        worst_h = worst_h.max(h);
        ensure(h <= 1e-8, || format!("homogeneity: {ns} vs {alpha} * {nu}"))?;
        let excess = (nsum - (nu + nv)) / (nu + nv);
        worst_t = worst_t.max(excess);
        ensure(excess <= 1e-8, || format!("triangle: {nsum} > {nu} + {nv}"))?;
    }
    Ok(format!(
        "constants exact to 1e-6; 500 pairs: homogeneity {worst_h:.1e}, triangle slack {:.1e}",
        -worst_t
    ))
}

fn delta2_constants() -> Outcome {
    let mut found = Vec::new();
    for p in [3.0, 4.0] {
        let r = check_delta2(power(p).as_ref(), false).map_err(|e| e.to_string())?;
        let k = r.constant("K").unwrap_or(f64::NAN);
        ensure(r.passed && rel(k, 2f64.powf(p)) <= 0.05, || format!("p={p}: K={k}"))?;
        found.push(k);
    }
    let dp = DoublePhase::new(3.0, 4.0, expr("1 + x1^2"), unit()).unwrap();
    let r = check_delta2(&dp, false).map_err(|e| e.to_string())?;
    let k = r.constant("K").unwrap_or(f64::NAN);
    ensure(r.passed && rel(k, 16.0) <= 0.05, || format!("double phase: K={k}"))?;
    found.push(k);
    let custom = Custom::new(expr("exp(t) - t - 1"), unit()).map_err(|e| e.to_string())?;
    let r = check_delta2(&custom, false).map_err(|e| e.to_string())?;
    ensure(!r.passed, || "exp(t) - t - 1 reported as Delta2".to_string())?;
    Ok(format!("K = {found:.3?}; exp(t) - t - 1 fails"))
}

fn cross_implications() -> Outcome {
    let mut families = builtin_families();
    families.push((
        "variable-exponent 3.5 + 0.5*x1",
        Arc::new(VariableExponent::new(expr("3.5 + 0.5*x1"), unit()).unwrap()),
    ));
    families.push((
        "variable-exponent 1.5 + 0.2*x1",
        Arc::new(VariableExponent::any_growth(expr("1.5 + 0.2*x1"), unit()).unwrap()),
    ));
    families.push(("variable-exponent 1.5", Arc::new(VariableExponent::constant(1.5, unit()).unwrap())));
    families.push((
        "double-phase 1.5, 1.8, 1 + x1^2",
        Arc::new(DoublePhase::any_growth(1.5, 1.8, expr("1 + x1^2"), unit()).unwrap()),
    ));
    let (mut p5, mut star) = (0, 0);
    for (name, m) in &families {
        let r5 = check_p5(m.as_ref()).map_err(|e| format!("{name}: {e}"))?;
        if !r5.passed {
            continue;
        }
        p5 += 1;
        let tilde = check_p5_tilde(m).map_err(|e| format!("{name}: {e}"))?;
        ensure(tilde.passed, || format!("{name}: P5 passes, P5-tilde fails"))?;
        let lattice = m.domain().interior_lattice(5);
        if p3_holds_everywhere(m.as_ref(), &lattice).map_err(|e| e.to_string())? {
            let s = check_p5_star(m.as_ref()).map_err(|e| format!("{name}: {e}"))?;
            ensure(s.passed, || format!("{name}: P5 and P3 pass, P5-star fails"))?;
            star += 1;
        }
    }
    ensure(p5 > 0 && star > 0, || format!("vacuous: {p5} P5 passes, {star} P5-star checks"))?;
    Ok(format!(
        "{} families; {p5} pass P5 and P5-tilde, {star} of them also P3 and P5-star",
        families.len()
    ))
}

fn random_test_function(rng: &mut ChaCha8Rng) -> String {
    let a = rng.random_range(0.2..1.5);
    let (k1, k2) = (rng.random_range(1..=3), rng.random_range(0..=3));
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    let b = rng.random_range(0.2..1.5);
    let (c1, c2) = (rng.random_range(0.3..0.7), rng.random_range(0.3..0.7));
    let gamma = rng.random_range(0.6..0.95);
    let c = rng.random_range(-1.0..1.0);
    let (i, j) = (rng.random_range(0..=3), rng.random_range(0..=3));
    format!(
        "{a}*sin(2*pi*({k1}*x1 + {k2}*x2) + {phase}) + {b}*((x1 - {c1})^2 + (x2 - {c2})^2)^{gamma} \
         + {c}*x1^{i}*x2^{j}"
    )
}

fn morrey_estimate() -> Outcome {
    let start = Instant::now();
    let k = reference_constant(2);
    ensure(rel(k, 4.0 * 2f64.sqrt()) < 1e-15, || format!("K(2) = {k}"))?;
    let center = [0.5, 0.5];
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, m) in builtin_families() {
        let verifier =
            MorreyVerifier::new(&m, &center, MorreyOptions::default()).map_err(|e| format!("{name}: {e}"))?;
        for f in 0..20 {
            let src = random_test_function(&mut rng);
            let u = sample(&expr(&src), m.domain(), 128).map_err(|e| e.to_string())?;
            let report = verifier.check(&u, 10_000, f).map_err(|e| format!("{name}, {src}: {e}"))?;
            worst = worst.max(report.max_ratio / k);
            ensure(report.within(0.05), || {
                format!("{name}, {src}: max_ratio {} > K 1.05", report.max_ratio)
            })?;
        }
        let constant = sample(&expr("2.5"), m.domain(), 128).map_err(|e| e.to_string())?;
        let report = verifier.check(&constant, 10_000, 0).map_err(|e| e.to_string())?;
        ensure(report.max_ratio == 0.0, || format!("{name}: constant gives {}", report.max_ratio))?;
    }
    let dt = timed(Duration::from_secs(300), start)?;
    Ok(format!("60 functions at 128^2, 1e4 pairs each; worst max_ratio / K = {worst:.3}; {dt:.2?}"))
}

fn cli_dir(sub: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join(sub)
}

fn cli_determinism() -> Outcome {
    let cases = [
        ("check", "check_variable_exponent", "json"),
        ("check", "check_double_phase", "json"),
        ("conjugate", "conjugate_power", "csv"),
        ("conjugate", "conjugate_subcritical", "csv"),
        ("modulus", "modulus_log_type", "csv"),
        ("norm", "norm_linear", "json"),
        ("verify", "verify_cusp", "json"),
    ];
    for (command, fixture, ext) in cases {
        let cfg = cli_dir("fixtures").join(format!("{fixture}.json"));
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_musielak"))
                .args([command, "--config", cfg.to_str().unwrap()])
                .output()
                .map_err(|e| e.to_string())
        };
        let (a, b) = (run()?, run()?);
        ensure(a.stdout == b.stdout, || format!("{fixture}: re-run differs"))?;
        let golden = std::fs::read(cli_dir("golden").join(format!("{fixture}.{ext}")))
            .map_err(|e| format!("{fixture}: {e}"))?;
        ensure(a.stdout == golden, || format!("{fixture}: differs from golden file"))?;
    }
    Ok(format!("{} fixtures byte-identical across runs and to golden files", cases.len()))
}

fn random_tree(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || rng.random_bool(0.25) {
        return match rng.random_range(0..5) {
            0 => Expr::Literal(rng.random_range(0.0..100.0)),
            1 => Expr::Literal(rng.random_range(0..20) as f64),
            2 => Expr::Var(rng.random_range(1..=3)),
            3 => Expr::Const(if rng.random_bool(0.5) { Constant::Pi } else { Constant::E }),
            _ => Expr::Call(Func::Norm, vec![]),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| Box::new(random_tree(rng, depth - 1));
    match rng.random_range(0..4) {
        0 => Expr::Neg(sub(rng)),
        1 | 2 => {
            let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow][rng.random_range(0..5)];
            Expr::Binary(op, sub(rng), sub(rng))
        }
        _ => {
            let funcs = [
                Func::Sin,
                Func::Cos,
                Func::Exp,
                Func::Log,
                Func::Sqrt,
                Func::Abs,
                Func::Min,
                Func::Max,
                Func::Pow,
            ];
            let f = funcs[rng.random_range(0..funcs.len())];
            let args = (0..f.arity()).map(|_| random_tree(rng, depth - 1)).collect();
            Expr::Call(f, args)
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Tok {
    Num(u32),
    Var(usize),
    Op(char),
    Neg,
    Open,
    Close,
}

/// Random well-formed infix token stream over `+ - * / ^`, unary minus and parentheses.
fn random_tokens(rng: &mut ChaCha8Rng, depth: u32, out: &mut Vec<Tok>) {
    if depth == 0 || rng.random_bool(0.3) {
        out.push(if rng.random_bool(0.6) {
            Tok::Num(rng.random_range(1..10))
        } else {
            Tok::Var(rng.random_range(1..=2))
        });
        return;
    }
    match rng.random_range(0..6) {
        0 => {
            out.push(Tok::Neg);
            random_tokens(rng, depth - 1, out);
        }
        1 => {
            out.push(Tok::Open);
            random_tokens(rng, depth - 1, out);
            out.push(Tok::Close);
        }
        _ => {
            random_tokens(rng, depth - 1, out);
            out.push(Tok::Op(['+', '-', '*', '/', '^'][rng.random_range(0..5)]));
            random_tokens(rng, depth - 1, out);
        }
    }
}

fn render(tokens: &[Tok]) -> String {
    let mut s = String::new();
    for t in tokens {
        match t {
            Tok::Num(v) => s.push_str(&v.to_string()),
            Tok::Var(i) => s.push_str(&format!("x{i}")),
            Tok::Op(c) => s.push_str(&format!(" {c} ")),
            Tok::Neg => s.push('-'),
            Tok::Open => s.push('('),
            Tok::Close => s.push(')'),
        }
    }
    s
}

/// Shunting-yard reference: `^` right-associative above unary minus, then
/// `* /`, then `+ -`, all binary operators but `^` left-associative.
fn shunting_yard(tokens: &[Tok]) -> Expr {
    fn prec(t: Tok) -> u8 {
        match t {
            Tok::Op('+' | '-') => 1,
            Tok::Op('*' | '/') => 2,
            Tok::Neg => 3,
            Tok::Op('^') => 4,
            _ => 0,
        }
    }
    fn apply(op: Tok, out: &mut Vec<Expr>) {
        let r = out.pop().unwrap();
        if op == Tok::Neg {
            out.push(Expr::Neg(Box::new(r)));
            return;
        }
        let l = out.pop().unwrap();
        let bop = match op {
            Tok::Op('+') => BinOp::Add,
            Tok::Op('-') => BinOp::Sub,
            Tok::Op('*') => BinOp::Mul,
            Tok::Op('/') => BinOp::Div,
            _ => BinOp::Pow,
        };
        out.push(Expr::Binary(bop, Box::new(l), Box::new(r)));
    }
    let mut out = Vec::new();
    let mut ops: Vec<Tok> = Vec::new();
    for &t in tokens {
        match t {
            Tok::Num(v) => out.push(Expr::Literal(v as f64)),
            Tok::Var(i) => out.push(Expr::Var(i)),
            Tok::Open | Tok::Neg => ops.push(t),
            Tok::Close => {
                while let Some(op) = ops.pop() {
                    if op == Tok::Open {
                        break;
                    }
                    apply(op, &mut out);
                }
            }
            Tok::Op(c) => {
                let p = prec(t);
                while let Some(&top) = ops.last() {
                    let tp = prec(top);
                    let pops = if c == '^' { tp > p } else { tp >= p };
                    if top == Tok::Open || !pops {
                        break;
                    }
                    apply(ops.pop().unwrap(), &mut out);
                }
                ops.push(t);
            }
        }
    }
    while let Some(op) = ops.pop() {
        apply(op, &mut out);
    }
    out.pop().unwrap()
}

fn parser_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..1000 {
        let tree = random_tree(&mut rng, 5);
        let text = tree.to_string();
        let back = parse(&text).map_err(|e| format!("`{text}`: {e}"))?;
        ensure(back == tree, || format!("round trip changed `{text}` into `{back}`"))?;
    }
    let mut agree = 0;
    for _ in 0..1000 {
        let mut tokens = Vec::new();
        random_tokens(&mut rng, 6, &mut tokens);
        let text = render(&tokens);
        let parsed = parse(&text).map_err(|e| format!("`{text}`: {e}"))?;
        let oracle = shunting_yard(&tokens);
        ensure(parsed == oracle, || format!("`{text}`: parser {parsed}, oracle {oracle}"))?;
        agree += 1;
    }
    Ok(format!("1000 round trips; precedence oracle agrees on {agree}/1000"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("closed-form Morrey modulus", closed_form_modulus),
        ("A-a-Young property suite", young_suite),
        ("conjugation oracle", conjugation_oracle),
        ("Luxemburg norm oracle", luxemburg_oracle),
        ("Delta2 constants", delta2_constants),
        ("condition cross-implications", cross_implications),
        ("Morrey estimate", morrey_estimate),
        ("CLI determinism", cli_determinism),
        ("parser suite", parser_suite),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
