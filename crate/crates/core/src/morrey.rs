//! Empirical checks of the local Morrey estimate
//! `|u(y₁) - u(y₂)| <= K(n) ‖∇u‖_A μ(x, |y₁ - y₂|)` on cubes `Q_σ(x)` and of
//! `μ`-Hölder seminorms, for grid-sampled functions.

use std::cell::RefCell;
use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::calculus::morrey_modulus_many;
use crate::conditions::{check_delta2, check_p5_tilde, ConditionId, ConditionReport};
use crate::error::{Error, Result};
use crate::modular::{gradient_norm, GridFunction, NORM_TOL};
use crate::nfunction::{conjugate_model, Model, NFunction};

/// Smallest resolution accepted by the Morrey check.
pub const MIN_RESOLUTION: usize = 64;
/// Pair count up to which Hölder seminorms are computed exhaustively.
pub const EXHAUSTIVE_PAIRS: usize = 1_000_000;

/// `K(n) = 16 / (4^{1/n} √n)`.
pub fn reference_constant(n: usize) -> f64 {
    let n = n as f64;
    16.0 / (4f64.powf(1.0 / n) * n.sqrt())
}

/// `σ = min{σ₀, (4^{1+δ₀}/(C₀√n))^{1/(1-nδ₀)}, dist(x, ∂Ω)/√n}` with
/// `(C₀, δ₀)` taken from a passing certification of the conjugate bound.
/// `σ₀` defaults to a quarter of the domain diameter.
pub fn select_sigma(
    m: &dyn NFunction<f64>,
    x: &[f64],
    certification: &ConditionReport,
    sigma0: Option<f64>,
) -> Result<f64> {
    if certification.condition != ConditionId::P5Tilde || !certification.passed {
        return Err(Error::MissingCertification(
            "a passing P5-tilde report is required to choose sigma".to_string(),
        ));
    }
    let (Some(c0), Some(delta0)) = (
        certification.constant("C_tilde"),
        certification.constant("delta_tilde"),
    ) else {
        return Err(Error::MissingCertification(
            "the P5-tilde report lacks fitted constants".to_string(),
        ));
    };
    let domain = m.domain();
    domain.check_contains(x)?;
    let n = domain.dim() as f64;
    let dist = domain.distance_to_boundary(x);
    if dist <= 0.0 {
        return Err(Error::Geometry(format!("{x:?} is not an interior point")));
    }
    let sigma0 = sigma0.unwrap_or(0.25 * domain.diameter());
    if sigma0.is_nan() || sigma0 <= 0.0 {
        return Err(Error::InvalidParameter(format!("sigma0 must be positive, got {sigma0}")));
    }
    Ok(sigma0
        .min(growth_radius(c0, delta0, domain.dim()))
        .min(dist / n.sqrt()))
}

/// `(4^{1+δ}/(C√n))^{1/(1-nδ)}`, infinite when `C = 0`.
pub fn growth_radius(c0: f64, delta0: f64, n: usize) -> f64 {
    let nf = n as f64;
    if c0 <= 0.0 {
        return f64::INFINITY;
    }
    (4f64.powf(1.0 + delta0) / (c0 * nf.sqrt())).powf(1.0 / (1.0 - nf * delta0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorreyOptions {
    pub sigma0: Option<f64>,
    /// Quadrature tolerance for `μ`.
    pub tol: f64,
    /// Tolerance of the Luxemburg norm of `|∇u|`.
    pub norm_tol: f64,
}

impl Default for MorreyOptions {
    fn default() -> Self {
        Self {
            sigma0: None,
            tol: 1e-10,
            norm_tol: NORM_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MorreyReport {
    pub center: Vec<f64>,
    pub sigma: f64,
    #[serde(rename = "K_ref")]
    pub k_ref: f64,
    pub max_ratio: f64,
    pub worst_pair: Option<[Vec<f64>; 2]>,
    pub samples: usize,
    pub grad_norm: f64,
    pub family: String,
    pub resolution: usize,
    pub seed: u64,
}

impl MorreyReport {
    pub fn within(&self, slack: f64) -> bool {
        self.max_ratio <= self.k_ref * (1.0 + slack)
    }
}

/// One sampled pair and its quotient.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRatio {
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderSeminorm {
    pub value: f64,
    pub r: f64,
    pub pair_count: usize,
    pub exhaustive: bool,
}

/// `μ(x, ·)` at lattice distances, memoised by integer cell offsets.
struct ModulusCache<'a> {
    model: &'a dyn NFunction<f64>,
    center: Vec<f64>,
    tol: f64,
    values: RefCell<HashMap<Vec<u32>, f64>>,
}

impl<'a> ModulusCache<'a> {
    fn new(model: &'a dyn NFunction<f64>, center: Vec<f64>, tol: f64) -> Self {
        Self {
            model,
            center,
            tol,
            values: RefCell::new(HashMap::new()),
        }
    }

    /// Fills the cache for all offsets (sorted absolute cell differences).
    fn prefetch(&self, offsets: &[Vec<u32>], spacing: &[f64]) -> Result<()> {
        let mut missing: Vec<Vec<u32>> = {
            let values = self.values.borrow();
            offsets.iter().filter(|o| !values.contains_key(*o)).cloned().collect()
        };
        missing.sort();
        missing.dedup();
        if missing.is_empty() {
            return Ok(());
        }
        let s: Vec<f64> = missing.iter().map(|o| offset_length(o, spacing)).collect();
        let mu = morrey_modulus_many(self.model, &self.center, &s, self.tol)?;
        let mut values = self.values.borrow_mut();
        for (o, r) in missing.into_iter().zip(mu) {
            values.insert(o, r.value);
        }
        Ok(())
    }

    fn get(&self, offset: &[u32]) -> f64 {
        self.values.borrow()[offset]
    }
}

fn offset_length(offset: &[u32], spacing: &[f64]) -> f64 {
    offset
        .iter()
        .zip(spacing)
        .map(|(&k, &h)| (k as f64 * h).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn offset(a: &[usize], b: &[usize]) -> Vec<u32> {
    a.iter().zip(b).map(|(&i, &j)| i.abs_diff(j) as u32).collect()
}

/// Cells of `u` whose midpoints lie in the closed cube of edge `edge` centred at `x`.
fn cells_in_cube(u: &GridFunction<f64>, x: &[f64], edge: f64) -> Vec<Vec<usize>> {
    let half = 0.5 * edge * (1.0 + 1e-12);
    (0..u.len())
        .map(|i| u.multi_index(i))
        .filter(|cell| {
            u.cell_center(cell)
                .iter()
                .zip(x)
                .all(|(c, xi)| (c - xi).abs() <= half)
        })
        .collect()
}

fn check_cube_inside(m: &dyn NFunction<f64>, x: &[f64], edge: f64) -> Result<()> {
    let d = m.domain();
    for i in 0..d.dim() {
        if x[i] - 0.5 * edge < d.lower()[i] || x[i] + 0.5 * edge > d.upper()[i] {
            return Err(Error::Geometry(format!(
                "cube of edge {edge} centred at {x:?} leaves the domain"
            )));
        }
    }
    Ok(())
}

/// Certified `σ` and memoised `μ(x, ·)` for one model and centre, reusable
/// across many grid functions.
pub struct MorreyVerifier<'a> {
    model: &'a Model<f64>,
    center: Vec<f64>,
    sigma: f64,
    options: MorreyOptions,
    certification: Vec<ConditionReport>,
    mu: ModulusCache<'a>,
}

impl<'a> MorreyVerifier<'a> {
    /// Certifies `Δ₂` for `A` and `Ã` and the conjugate gradient bound, then
    /// selects `σ`.
    pub fn new(model: &'a Model<f64>, center: &[f64], options: MorreyOptions) -> Result<Self> {
        let p5_tilde = check_p5_tilde(model)?;
        let delta2 = check_delta2(model.as_ref(), false)?;
        let conj = conjugate_model(model);
        let mut delta2_conj = check_delta2(conj.as_ref(), false)?;
        delta2_conj.notes.push("complementary function".to_string());
        for r in [&delta2, &delta2_conj] {
            if !r.passed {
                return Err(Error::MissingCertification(format!(
                    "Delta2 fails for {}",
                    if std::ptr::eq(r, &delta2) { "A" } else { "the complementary function" }
                )));
            }
        }
        let sigma = select_sigma(model.as_ref(), center, &p5_tilde, options.sigma0)?;
        Self::build(model, center, sigma, options, vec![p5_tilde, delta2, delta2_conj])
    }

    /// Uses a caller-chosen `σ`, skipping certification.
    pub fn with_sigma(
        model: &'a Model<f64>,
        center: &[f64],
        sigma: f64,
        options: MorreyOptions,
    ) -> Result<Self> {
        Self::build(model, center, sigma, options, Vec::new())
    }

    fn build(
        model: &'a Model<f64>,
        center: &[f64],
        sigma: f64,
        options: MorreyOptions,
        certification: Vec<ConditionReport>,
    ) -> Result<Self> {
        if sigma.is_nan() || sigma <= 0.0 {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        check_cube_inside(model.as_ref(), center, sigma)?;
        Ok(Self {
            model,
            center: center.to_vec(),
            sigma,
            options,
            certification,
            mu: ModulusCache::new(model.as_ref(), center.to_vec(), options.tol),
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn certification(&self) -> &[ConditionReport] {
        &self.certification
    }

    fn check_grid(&self, u: &GridFunction<f64>) -> Result<()> {
        if u.resolution() < MIN_RESOLUTION {
            return Err(Error::Grid(format!(
                "the Morrey check needs resolution >= {MIN_RESOLUTION}, got {}",
                u.resolution()
            )));
        }
        if u.domain() != self.model.domain() {
            return Err(Error::Grid(
                "grid function and model live on different domains".to_string(),
            ));
        }
        Ok(())
    }

    /// Seeded pairs of distinct lattice cells in `Q_σ(x)` with their quotients
    /// `|u(y₁) - u(y₂)| / (‖∇u‖_A μ(x, |y₁ - y₂|))`.
    pub fn pair_ratios(&self, u: &GridFunction<f64>, pairs: usize, seed: u64) -> Result<(f64, Vec<PairRatio>)> {
        self.check_grid(u)?;
        let cells = cells_in_cube(u, &self.center, self.sigma);
        if cells.len() < 2 {
            return Err(Error::Geometry(format!(
                "the cube of edge {} holds {} lattice cells; refine the grid",
                self.sigma,
                cells.len()
            )));
        }
        let grad_norm = gradient_norm(self.model.as_ref(), u, self.options.norm_tol)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chosen: Vec<(usize, usize)> = (0..pairs)
            .map(|_| {
                let i = rng.random_range(0..cells.len());
                let mut j = rng.random_range(0..cells.len() - 1);
                if j >= i {
                    j += 1;
                }
                (i, j)
            })
            .collect();
        let spacing: Vec<f64> = (0..u.dim()).map(|a| u.spacing(a)).collect();
        let offsets: Vec<Vec<u32>> = chosen
            .iter()
            .map(|&(i, j)| offset(&cells[i], &cells[j]))
            .collect();
        self.mu.prefetch(&offsets, &spacing)?;
        let values = u.values();
        let out = chosen
            .iter()
            .zip(&offsets)
            .map(|(&(i, j), o)| {
                let a = values[u.flat_index(&cells[i])];
                let b = values[u.flat_index(&cells[j])];
                let num = (a - b).abs();
                let ratio = if num == 0.0 {
                    0.0
                } else {
                    num / (grad_norm * self.mu.get(o))
                };
                PairRatio {
                    y1: u.cell_center(&cells[i]),
                    y2: u.cell_center(&cells[j]),
                    ratio,
                }
            })
            .collect();
        Ok((grad_norm, out))
    }

    pub fn check(&self, u: &GridFunction<f64>, pairs: usize, seed: u64) -> Result<MorreyReport> {
        let (grad_norm, ratios) = self.pair_ratios(u, pairs, seed)?;
        let mut max_ratio = 0.0f64;
        let mut worst_pair = None;
        for p in ratios {
            if p.ratio > max_ratio || (worst_pair.is_none() && p.ratio == max_ratio) {
                max_ratio = p.ratio;
                worst_pair = Some([p.y1, p.y2]);
            }
        }
        Ok(MorreyReport {
            center: self.center.clone(),
            sigma: self.sigma,
            k_ref: reference_constant(u.dim()),
            max_ratio,
            worst_pair,
            samples: pairs,
            grad_norm,
            family: self.model.family().as_str().to_string(),
            resolution: u.resolution(),
            seed,
        })
    }

    /// `sup |u(y₁) - u(y₂)| / μ(x, |y₁ - y₂|)` over lattice pairs in `Q_r(x)`,
    /// exhaustive up to [`EXHAUSTIVE_PAIRS`] pairs and seeded beyond.
    pub fn holder_seminorm(&self, u: &GridFunction<f64>, r: f64, seed: u64) -> Result<HolderSeminorm> {
        holder_seminorm_with(self.model.as_ref(), &self.mu, u, &self.center, r, seed)
    }
}

fn holder_seminorm_with(
    m: &dyn NFunction<f64>,
    mu: &ModulusCache<'_>,
    u: &GridFunction<f64>,
    x: &[f64],
    r: f64,
    seed: u64,
) -> Result<HolderSeminorm> {
    let dist = m.domain().distance_to_boundary(x);
    if !(r > 0.0 && 0.5 * r < dist) {
        return Err(Error::Geometry(format!(
            "need 0 < r/2 < dist(x, boundary) = {dist}, got r = {r}"
        )));
    }
    if u.domain() != m.domain() {
        return Err(Error::Grid(
            "grid function and model live on different domains".to_string(),
        ));
    }
    let cells = cells_in_cube(u, x, r);
    let k = cells.len();
    let total = k * k.saturating_sub(1) / 2;
    let exhaustive = total <= EXHAUSTIVE_PAIRS;
    let chosen: Vec<(usize, usize)> = if exhaustive {
        (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..EXHAUSTIVE_PAIRS)
            .map(|_| {
                let i = rng.random_range(0..k);
                let mut j = rng.random_range(0..k - 1);
                if j >= i {
                    j += 1;
                }
                (i, j)
            })
            .collect()
    };
    let spacing: Vec<f64> = (0..u.dim()).map(|a| u.spacing(a)).collect();
    let offsets: Vec<Vec<u32>> = chosen.iter().map(|&(i, j)| offset(&cells[i], &cells[j])).collect();
    mu.prefetch(&offsets, &spacing)?;
    let values = u.values();
    let mut value = 0.0f64;
    for (&(i, j), o) in chosen.iter().zip(&offsets) {
        let num = (values[u.flat_index(&cells[i])] - values[u.flat_index(&cells[j])]).abs();
        if num > 0.0 {
            value = value.max(num / mu.get(o));
        }
    }
    Ok(HolderSeminorm {
        value,
        r,
        pair_count: chosen.len(),
        exhaustive,
    })
}

/// One-off Morrey check: certification, `σ`, seeded pairs and report.
pub fn empirical_morrey_check(
    model: &Model<f64>,
    u: &GridFunction<f64>,
    x: &[f64],
    pairs: usize,
    seed: u64,
    options: MorreyOptions,
) -> Result<MorreyReport> {
    MorreyVerifier::new(model, x, options)?.check(u, pairs, seed)
}

/// One-off `μ`-Hölder seminorm on `Q_r(x)`.
pub fn holder_seminorm(
    model: &dyn NFunction<f64>,
    u: &GridFunction<f64>,
    x: &[f64],
    r: f64,
    seed: u64,
    tol: f64,
) -> Result<HolderSeminorm> {
    let cache = ModulusCache::new(model, x.to_vec(), tol);
    holder_seminorm_with(model, &cache, u, x, r, seed)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::exprlang::parse;
    use crate::modular::{sample, sobolev_norm};
    use crate::nfunction::{Domain, VariableExponent};

    fn unit() -> Domain<f64> {
        Domain::unit(2).unwrap()
    }

    fn power(p: f64) -> Model<f64> {
        Arc::new(VariableExponent::constant(p, unit()).unwrap())
    }

    fn grid(src: &str, m: usize) -> GridFunction<f64> {
        sample(&parse(src).unwrap(), &unit(), m).unwrap()
    }

    const X: [f64; 2] = [0.5, 0.5];

    #[test]
    fn reference_constant_values() {
        assert!((reference_constant(2) - 4.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!((reference_constant(3) - 16.0 / (4f64.powf(1.0 / 3.0) * 3f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn sigma_selection() {
        let m = power(4.0);
        let cert = check_p5_tilde(&m).unwrap();
        let s = select_sigma(m.as_ref(), &X, &cert, Some(1.0)).unwrap();
        assert!((s - 0.5 / 2f64.sqrt()).abs() < 1e-15);
        let r = growth_radius(1.0, 0.25, 2);
        assert!((r - 16.0).abs() < 1e-12, "{r}");
        let mut failed = cert.clone();
        failed.passed = false;
        assert!(matches!(
            select_sigma(m.as_ref(), &X, &failed, None),
            Err(Error::MissingCertification(_))
        ));
        assert!(matches!(
            select_sigma(m.as_ref(), &[0.0, 0.5], &cert, None),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn constant_function_gives_zero() {
        let m = power(4.0);
        let v = MorreyVerifier::new(&m, &X, MorreyOptions::default()).unwrap();
        let r = v.check(&grid("2.5", 64), 2000, 1).unwrap();
        assert_eq!(r.max_ratio, 0.0);
        assert_eq!(r.grad_norm, 0.0);
    }

    #[test]
    fn cusp_within_bound() {
        let m = power(4.0);
        let v = MorreyVerifier::new(&m, &X, MorreyOptions::default()).unwrap();
        let u = grid("((x1 - 0.5)^2 + (x2 - 0.5)^2)^0.3", 64);
        let r = v.check(&u, 5000, 9).unwrap();
        assert!(r.max_ratio > 0.0 && r.within(0.05), "{r:?}");
    }

    #[test]
    fn scale_covariance() {
        let m = power(4.0);
        let v = MorreyVerifier::new(&m, &X, MorreyOptions::default()).unwrap();
        let u = grid("sin(3*x1)*cos(2*x2)", 64);
        let a = v.check(&u, 3000, 5).unwrap().max_ratio;
        let b = v.check(&u.scale(7.0).unwrap(), 3000, 5).unwrap().max_ratio;
        assert!((a - b).abs() <= 1e-9 * a);
    }

    #[test]
    fn localization_is_monotone() {
        let m = power(4.0);
        let v = MorreyVerifier::new(&m, &X, MorreyOptions::default()).unwrap();
        let u = grid("x1^2 + sin(4*x2)", 64);
        let (_, ratios) = v.pair_ratios(&u, 4000, 11).unwrap();
        let all = ratios.iter().map(|p| p.ratio).fold(0.0, f64::max);
        let half = 0.25 * v.sigma();
        let inner = ratios
            .iter()
            .filter(|p| {
                p.y1.iter().chain(&p.y2).enumerate().all(|(i, c)| (c - X[i % 2]).abs() <= half)
            })
            .map(|p| p.ratio)
            .fold(0.0, f64::max);
        assert!(inner <= all);
    }

    #[test]
    fn low_resolution_rejected() {
        let m = power(4.0);
        let v = MorreyVerifier::with_sigma(&m, &X, 0.3, MorreyOptions::default()).unwrap();
        assert!(matches!(v.check(&grid("x1", 16), 10, 0), Err(Error::Grid(_))));
        assert!(MorreyVerifier::with_sigma(&m, &X, 1.5, MorreyOptions::default()).is_err());
    }

    #[test]
    fn holder_seminorm_examples() {
        let m = power(4.0);
        let c = holder_seminorm(m.as_ref(), &grid("1", 32), &X, 0.5, 0, 1e-10).unwrap();
        assert_eq!(c.value, 0.0);
        assert!(c.exhaustive);
        let u = grid("x1", 32);
        let h = holder_seminorm(m.as_ref(), &u, &X, 0.5, 0, 1e-10).unwrap();
        assert!(h.value.is_finite() && h.value > 0.0);
        let w1a = sobolev_norm(m.as_ref(), &u, NORM_TOL).unwrap();
        assert!(h.value <= reference_constant(2) * w1a);
        assert!(holder_seminorm(m.as_ref(), &u, &X, 1.2, 0, 1e-10).is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let m = power(4.0);
        let v = MorreyVerifier::new(&m, &X, MorreyOptions::default()).unwrap();
        let u = grid("x1*x2", 64);
        let a = serde_json::to_string(&v.check(&u, 500, 3).unwrap()).unwrap();
        let b = serde_json::to_string(&v.check(&u, 500, 3).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("\"K_ref\""));
    }
}
