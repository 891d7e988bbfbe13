//! Subcommand implementations. Each returns the rendered output and whether
//! every requested check passed.

use serde::Serialize;

use musielak::calculus::{p3_fit, sobolev_conjugate_inverse, ModulusTable};
use musielak::conditions::{
    check_delta2, check_p3, check_p5, check_p5_star, check_p5_tilde, verify_young_relations,
    ConditionReport,
};
use musielak::modular::{gradient_norm, luxemburg_norm, sample, NORM_TOL};
use musielak::morrey::{MorreyOptions, MorreyReport, MorreyVerifier};
use musielak::{Model, NFunctionExt};

use crate::config::RunConfig;
use crate::error::CliError;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_PAIRS: usize = 10_000;
pub const NORM_RESOLUTION: usize = 64;
pub const VERIFY_RESOLUTION: usize = 128;
/// Relative allowance on `K_ref` before `verify` reports failure.
pub const VERIFY_SLACK: f64 = 0.05;

pub const ALL_CHECKS: [&str; 7] = [
    "Delta2",
    "Delta2-near-infinity",
    "P3",
    "P5",
    "P5-star",
    "P5-tilde",
    "A-a-Young",
];

/// Lattice size per axis used to decide whether P3 holds on all of the domain.
const P3_LATTICE: usize = 5;

pub struct Output {
    pub text: String,
    pub passed: bool,
}

fn to_json<S: Serialize>(v: &S) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v)
        .map_err(|e| CliError::Config(format!("cannot serialise output: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Serialize)]
struct Skipped {
    condition: &'static str,
    reason: String,
}

#[derive(Serialize)]
struct CheckOutput {
    family: &'static str,
    passed: bool,
    reports: Vec<ConditionReport>,
    skipped: Vec<Skipped>,
}

pub fn check(cfg: &RunConfig, seed: u64) -> Result<Output, CliError> {
    let model = cfg.model()?;
    let requested: Vec<String> = match &cfg.checks {
        Some(list) => {
            for name in list {
                if !ALL_CHECKS.contains(&name.as_str()) {
                    return Err(CliError::Config(format!(
                        "unknown check `{name}`; expected one of {}",
                        ALL_CHECKS.join(", ")
                    )));
                }
            }
            list.clone()
        }
        None => ALL_CHECKS.iter().map(|s| s.to_string()).collect(),
    };
    let wants = |name: &str| requested.iter().any(|r| r == name);
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    if wants("Delta2") {
        reports.push(check_delta2(model.as_ref(), false)?);
    }
    if wants("Delta2-near-infinity") {
        reports.push(check_delta2(model.as_ref(), true)?);
    }
    if wants("P3") {
        for x in cfg.points() {
            reports.push(check_p3(model.as_ref(), &x)?);
        }
    }
    if wants("P5") {
        reports.push(check_p5(model.as_ref())?);
    }
    if wants("P5-star") {
        let lattice = model.domain().interior_lattice(P3_LATTICE);
        if musielak::conditions::p3_holds_everywhere(model.as_ref(), &lattice)? {
            reports.push(check_p5_star(model.as_ref())?);
        } else {
            skipped.push(Skipped {
                condition: "P5-star",
                reason: "P3 fails somewhere in the domain".to_string(),
            });
        }
    }
    if wants("P5-tilde") {
        reports.push(check_p5_tilde(&model)?);
    }
    if wants("A-a-Young") {
        let samples = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
        reports.push(verify_young_relations(model.as_ref(), samples, seed)?);
    }
    let passed = reports.iter().all(|r| r.passed);
    let out = CheckOutput {
        family: model.family().as_str(),
        passed,
        reports,
        skipped,
    };
    Ok(Output {
        text: to_json(&out)?,
        passed,
    })
}

pub fn conjugate(cfg: &RunConfig, grid: Option<Vec<f64>>, tol: f64) -> Result<Output, CliError> {
    let model = cfg.model()?;
    let ts = grid
        .or_else(|| cfg.t.clone())
        .ok_or_else(|| CliError::Config("no t grid: set `t` or pass --grid".to_string()))?;
    if ts.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
        return Err(CliError::Config("t values must be finite and nonnegative".to_string()));
    }
    let n = model.dim();
    let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    header.extend(["t", "A", "a", "conj_A", "conj_a", "sobolev_inv"].map(String::from));
    let mut text = header.join(",");
    text.push('\n');
    for x in cfg.points() {
        model.domain().check_contains(&x)?;
        let p3 = p3_fit(model.as_ref(), &x)?.passed;
        for &t in &ts {
            let mut cells: Vec<String> = x.iter().map(|&v| fmt(v)).collect();
            cells.push(fmt(t));
            cells.push(fmt(model.eval(&x, t)?));
            cells.push(fmt(model.derivative(&x, t)?));
            cells.push(fmt(model.conjugate(&x, t)?));
            cells.push(fmt(model.conjugate_derivative(&x, t)?));
            cells.push(if p3 {
                fmt(sobolev_conjugate_inverse(model.as_ref(), &x, t, tol)?.value)
            } else {
                "n/a (P3 fails)".to_string()
            });
            text.push_str(&cells.join(","));
            text.push('\n');
        }
    }
    Ok(Output { text, passed: true })
}

pub fn modulus(cfg: &RunConfig, s: Option<Vec<f64>>, tol: f64) -> Result<Output, CliError> {
    let model = cfg.model()?;
    let s = s
        .or_else(|| cfg.s.clone())
        .ok_or_else(|| CliError::Config("no s grid: set `s` or pass --s".to_string()))?;
    if s.is_empty() {
        return Err(CliError::Config("the s grid is empty".to_string()));
    }
    if s.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(CliError::Config("s values must be positive".to_string()));
    }
    let table = ModulusTable::build(model.as_ref(), &cfg.points(), &s, tol)?;
    Ok(Output {
        text: table.to_csv(),
        passed: true,
    })
}

#[derive(Serialize)]
struct NormOutput {
    norm_u: f64,
    norm_grad_u: f64,
    #[serde(rename = "norm_W1A")]
    norm_w1a: f64,
}

pub fn norm(cfg: &RunConfig, u: Option<String>, resolution: usize, tol: f64) -> Result<Output, CliError> {
    let model = cfg.model()?;
    let expr = match u {
        Some(src) => musielak::parse(&src).map_err(|e| CliError::Config(format!("u: {e}")))?,
        None => cfg.u_expr()?,
    };
    let grid = sample(&expr, model.domain(), resolution)?;
    let norm_u = luxemburg_norm(model.as_ref(), &grid, tol)?;
    let norm_grad_u = gradient_norm(model.as_ref(), &grid, tol)?;
    let out = NormOutput {
        norm_u,
        norm_grad_u,
        norm_w1a: norm_u + norm_grad_u,
    };
    Ok(Output {
        text: to_json(&out)?,
        passed: true,
    })
}

#[derive(Serialize)]
struct VerifyOutput {
    #[serde(flatten)]
    report: MorreyReport,
    slack: f64,
    within_bound: bool,
}

pub struct VerifyArgs {
    pub u: Option<String>,
    pub center: Option<Vec<f64>>,
    pub pairs: Option<usize>,
    pub resolution: usize,
    pub seed: u64,
    pub tol: f64,
}

pub fn verify(cfg: &RunConfig, args: VerifyArgs) -> Result<Output, CliError> {
    let model: Model<f64> = cfg.model()?;
    let expr = match args.u {
        Some(src) => musielak::parse(&src).map_err(|e| CliError::Config(format!("u: {e}")))?,
        None => cfg.u_expr()?,
    };
    let center = args.center.unwrap_or_else(|| cfg.center());
    if center.len() != model.dim() {
        return Err(CliError::Config(format!(
            "center has {} coordinates, domain has {}",
            center.len(),
            model.dim()
        )));
    }
    let grid = sample(&expr, model.domain(), args.resolution)?;
    let options = MorreyOptions {
        sigma0: cfg.sigma0,
        tol: args.tol,
        norm_tol: NORM_TOL,
    };
    let verifier = MorreyVerifier::new(&model, &center, options)?;
    let pairs = args.pairs.or(cfg.pairs).unwrap_or(DEFAULT_PAIRS);
    let report = verifier.check(&grid, pairs, args.seed)?;
    let within_bound = report.within(VERIFY_SLACK);
    let out = VerifyOutput {
        report,
        slack: VERIFY_SLACK,
        within_bound,
    };
    Ok(Output {
        text: to_json(&out)?,
        passed: within_bound,
    })
}
