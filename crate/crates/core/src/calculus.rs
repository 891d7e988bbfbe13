//! Sobolev conjugate `A_*`, its saturation level `T(x)`, and the Morrey
//! modulus `μ(x, s)`, all by quadrature of `A^{-1}(x, τ) τ^{-(n+1)/n}`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::nfunction::{NFunction, NFunctionExt, Section, SectionExt};
use crate::quadrature::{adaptive, graded, Grading, QuadratureResult, Tolerance};
use crate::scalar::{to_f64_vec, Scalar};

/// Subdivision budget for bounded-interval pieces.
const MAX_SUBDIVISIONS: usize = 400;

/// A value in `[0, +∞]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Extended<T> {
    Finite(T),
    #[serde(serialize_with = "serialize_infinity")]
    PosInfinity,
}

fn serialize_infinity<S: serde::Serializer>(s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str("+inf")
}

impl<T: Scalar> Extended<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    /// The value as a float, `+∞` included.
    pub fn to_scalar(self) -> T {
        match self {
            Extended::Finite(v) => v,
            Extended::PosInfinity => T::infinity(),
        }
    }
}

/// Exponent `(n + 1)/n` of the Sobolev weight.
fn weight_exponent<T: Scalar>(n: usize) -> T {
    T::lit((n as f64 + 1.0) / n as f64)
}

/// `A^{-1}(x0, τ) τ^{-(n+1)/n}`.
fn integrand<T: Scalar>(sec: &dyn Section<T>, n: usize, tau: T) -> Result<T> {
    if tau <= T::zero() {
        return Ok(T::zero());
    }
    Ok(sec.inverse(tau)? * tau.powf(-weight_exponent::<T>(n)))
}

/// `∫_a^b integrand` in the variable `u = ln τ`, for `0 < a <= b`.
fn log_integral<T: Scalar>(
    sec: &dyn Section<T>,
    n: usize,
    a: T,
    b: T,
    tol: Tolerance<T>,
) -> Result<QuadratureResult<T>> {
    let mut g = |u: T| {
        let tau = u.exp();
        Ok(integrand(sec, n, tau)? * tau)
    };
    adaptive(&mut g, a.ln(), b.ln(), tol, MAX_SUBDIVISIONS)
}

fn require_converged<T: Scalar>(r: QuadratureResult<T>, tol: Tolerance<T>) -> Result<QuadratureResult<T>> {
    if r.converged {
        Ok(r)
    } else {
        Err(Error::Quadrature {
            error: r.abs_error_estimate.as_f64(),
            target: tol.target(r.value).as_f64(),
        })
    }
}

/// Local behaviour of the Sobolev integrand at `τ → 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct P3Fit<T> {
    /// Least-squares slope of `ln(integrand)` against `ln τ` on `[1e-12, 1e-2]`.
    pub exponent: T,
    /// `∫_{1e-12}^{1e-8} / ∫_{1e-8}^{1e-4}`; below one when partial integrals settle.
    pub cauchy_ratio: T,
    pub passed: bool,
}

/// Margin by which the fitted exponent must exceed `-1`.
pub const P3_MARGIN: f64 = 1e-3;

/// Fits the exponent of the Sobolev integrand near zero at `x`.
pub fn p3_fit<T: Scalar>(m: &dyn NFunction<T>, x: &[T]) -> Result<P3Fit<T>> {
    let n = m.dim();
    let sec = m.section_at(x)?;
    let points = 21;
    let (mut sx, mut sy, mut sxx, mut sxy) = (T::zero(), T::zero(), T::zero(), T::zero());
    for k in 0..points {
        let lt = T::lit(-12.0 + 10.0 * k as f64 / (points - 1) as f64) * T::lit(10f64.ln());
        let f = integrand(sec.as_ref(), n, lt.exp())?;
        let lf = f.ln();
        sx = sx + lt;
        sy = sy + lf;
        sxx = sxx + lt * lt;
        sxy = sxy + lt * lf;
    }
    let np = T::lit(points as f64);
    let exponent = (np * sxy - sx * sy) / (np * sxx - sx * sx);
    let tol = Tolerance::new(T::lit(1e-8).max(T::epsilon() * T::lit(64.0)));
    let low = log_integral(sec.as_ref(), n, T::lit(1e-12), T::lit(1e-8), tol)?;
    let high = log_integral(sec.as_ref(), n, T::lit(1e-8), T::lit(1e-4), tol)?;
    let cauchy_ratio = low.value / high.value;
    let passed = exponent > T::lit(-1.0 + P3_MARGIN) && cauchy_ratio < T::lit(0.99);
    Ok(P3Fit {
        exponent,
        cauchy_ratio,
        passed,
    })
}

fn check_p3<T: Scalar>(m: &dyn NFunction<T>, x: &[T]) -> Result<()> {
    let fit = p3_fit(m, x)?;
    if fit.passed {
        Ok(())
    } else {
        Err(Error::P3Violation {
            point: to_f64_vec(x),
            exponent: fit.exponent.as_f64(),
        })
    }
}

fn zero_result<T: Scalar>() -> QuadratureResult<T> {
    QuadratureResult {
        value: T::zero(),
        abs_error_estimate: T::zero(),
        subdivisions: 0,
        converged: true,
    }
}

fn check_positive<T: Scalar>(what: &'static str, s: T) -> Result<()> {
    if !s.is_finite() || s < T::zero() {
        return Err(Error::NonFinite {
            what,
            value: s.as_f64(),
        });
    }
    Ok(())
}

/// Graded sweep of the Sobolev integrand from `s` down to zero.
fn sobolev_from_zero<T: Scalar>(
    sec: &dyn Section<T>,
    n: usize,
    x: &[T],
    s: T,
    tol: Tolerance<T>,
) -> Result<QuadratureResult<T>> {
    // keep τ^{-(n+1)/n} finite
    let floor = (T::max_value() / T::lit(1e20)).powf(-weight_exponent::<T>(n).recip());
    let mut f = |tau: T| integrand(sec, n, tau);
    let g = graded(&mut f, Grading::TowardZero { upper: s, floor }, tol)?;
    if g.divergent {
        return Err(Error::P3Violation {
            point: to_f64_vec(x),
            exponent: g.exponent.map_or(f64::NAN, |e| e.as_f64()),
        });
    }
    require_converged(g.quadrature, tol)
}

/// `A_*^{-1}(x, s) = ∫_0^s A^{-1}(x, τ) τ^{-(n+1)/n} dτ`.
///
/// The integrability at zero is checked first; a failing fit is reported as
/// [`Error::P3Violation`].
pub fn sobolev_conjugate_inverse<T: Scalar>(
    m: &dyn NFunction<T>,
    x: &[T],
    s: T,
    tol: T,
) -> Result<QuadratureResult<T>> {
    check_positive("sobolev conjugate inverse", s)?;
    check_p3(m, x)?;
    if s == T::zero() {
        return Ok(zero_result());
    }
    let sec = m.section_at(x)?;
    sobolev_from_zero(sec.as_ref(), m.dim(), x, s, Tolerance::new(tol))
}

/// `T(x)` with the Cauchy gap of the last step of the progression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Saturation<T> {
    pub value: Extended<T>,
    /// Relative growth of `A_*^{-1}` over the last step `[1e10, 1e12]`.
    pub gap: T,
}

/// Relative gap above which `A_*^{-1}` is declared unbounded.
pub const SATURATION_GAP: f64 = 1e-4;

/// `T(x) = lim_{s→∞} A_*^{-1}(x, s)`, from `A_*^{-1}` at `s = 1e2, 1e4, …, 1e12`.
pub fn limit_t<T: Scalar>(m: &dyn NFunction<T>, x: &[T], tol: T) -> Result<Saturation<T>> {
    check_p3(m, x)?;
    let sec = m.section_at(x)?;
    saturation(sec.as_ref(), m.dim(), x, Tolerance::new(tol))
}

fn saturation<T: Scalar>(
    sec: &dyn Section<T>,
    n: usize,
    x: &[T],
    tol: Tolerance<T>,
) -> Result<Saturation<T>> {
    let mut value = sobolev_from_zero(sec, n, x, T::lit(1e2), tol)?.value;
    let mut gap = T::zero();
    for k in 2..=6 {
        let a = T::lit(10f64.powi(2 * k - 2));
        let b = T::lit(10f64.powi(2 * k));
        if !b.is_finite() {
            break;
        }
        let step = require_converged(log_integral(sec, n, a, b, tol)?, tol)?.value;
        value = value + step;
        gap = step / value;
    }
    let value = if gap > T::lit(SATURATION_GAP) {
        Extended::PosInfinity
    } else {
        Extended::Finite(value)
    };
    Ok(Saturation { value, gap })
}

/// `A_*(x0, ·)` at a fixed point, with `A_*^{-1}(x0, 1)` and `T(x0)` cached.
pub struct SobolevSection<'a, T> {
    sec: Box<dyn Section<T> + 'a>,
    n: usize,
    at_one: T,
    limit: Saturation<T>,
    tol: Tolerance<T>,
}

impl<'a, T: Scalar> SobolevSection<'a, T> {
    pub fn new(m: &'a dyn NFunction<T>, x: &[T], tol: T) -> Result<Self> {
        check_p3(m, x)?;
        let sec = m.section_at(x)?;
        let n = m.dim();
        let tol = Tolerance::new(tol);
        let at_one = sobolev_from_zero(sec.as_ref(), n, x, T::one(), tol)?.value;
        let limit = saturation(sec.as_ref(), n, x, tol)?;
        Ok(Self {
            sec,
            n,
            at_one,
            limit,
            tol,
        })
    }

    pub fn limit(&self) -> Saturation<T> {
        self.limit
    }

    /// `A_*^{-1}(x0, s)`.
    pub fn inverse(&self, s: T) -> Result<T> {
        check_positive("sobolev conjugate inverse", s)?;
        if s == T::zero() {
            return Ok(T::zero());
        }
        let (a, b, sign) = if s >= T::one() {
            (T::one(), s, T::one())
        } else {
            (s, T::one(), -T::one())
        };
        let piece = require_converged(log_integral(self.sec.as_ref(), self.n, a, b, self.tol)?, self.tol)?;
        Ok(self.at_one + sign * piece.value)
    }

    /// `A_*(x0, t)`: `+∞` once `|t| >= T(x0)`.
    pub fn value(&self, t: T) -> Result<Extended<T>> {
        let t = t.abs();
        if t == T::zero() {
            return Ok(Extended::Finite(T::zero()));
        }
        if let Extended::Finite(limit) = self.limit.value {
            if t >= limit {
                return Ok(Extended::PosInfinity);
            }
        }
        let s = crate::roots::solve_increasing(
            |s| self.inverse(s),
            Some(|s| integrand(self.sec.as_ref(), self.n, s)),
            t,
            T::one(),
            "sobolev conjugate",
        )?;
        Ok(Extended::Finite(s))
    }
}

/// `T(x)` alone.
pub fn limit_value<T: Scalar>(m: &dyn NFunction<T>, x: &[T], tol: T) -> Result<Extended<T>> {
    Ok(limit_t(m, x, tol)?.value)
}

/// `A_*(x, t)`: the `s` with `A_*^{-1}(x, s) = |t|`, or `+∞` for `|t| >= T(x)`.
pub fn sobolev_conjugate<T: Scalar>(
    m: &dyn NFunction<T>,
    x: &[T],
    t: T,
    tol: T,
) -> Result<Extended<T>> {
    if !t.is_finite() {
        return Err(Error::NonFinite {
            what: "sobolev conjugate",
            value: t.as_f64(),
        });
    }
    if t == T::zero() {
        check_p3(m, x)?;
        return Ok(Extended::Finite(T::zero()));
    }
    SobolevSection::new(m, x, tol)?.value(t)
}

/// `n A^{-1}(x0, r^{-n})`, the integrand of `μ` after `τ = r^{-n}`.
fn modulus_integrand<T: Scalar>(sec: &dyn Section<T>, n: usize, r: T) -> Result<T> {
    if r <= T::zero() {
        return Ok(T::zero());
    }
    let tau = r.powi(-(n as i32));
    if !tau.is_finite() {
        return Err(Error::Overflow {
            what: "Morrey modulus integrand",
        });
    }
    Ok(T::lit(n as f64) * sec.inverse(tau)?)
}

/// Smallest `r` for which `r^{-n}` stays comfortably finite.
fn modulus_floor<T: Scalar>(n: usize) -> T {
    (T::max_value() / T::lit(1e20)).powf(-T::one() / T::lit(n as f64))
}

fn modulus_from_zero<T: Scalar>(
    sec: &dyn Section<T>,
    n: usize,
    s: T,
    tol: Tolerance<T>,
) -> Result<QuadratureResult<T>> {
    let mut f = |r: T| modulus_integrand(sec, n, r);
    let floor = modulus_floor::<T>(n);
    let g = graded(&mut f, Grading::TowardZero { upper: s, floor }, tol)?;
    if g.divergent {
        // r-exponent β of the integrand corresponds to τ-exponent -β/n - (n+1)/n
        let beta = g.exponent.map_or(f64::NAN, |e| e.as_f64());
        let nf = n as f64;
        return Err(Error::DivergentTail {
            exponent: -beta / nf - (nf + 1.0) / nf,
        });
    }
    require_converged(g.quadrature, tol)
}

/// `μ(x, s) = ∫_{s^{-n}}^∞ A^{-1}(x, τ) τ^{-(n+1)/n} dτ = n ∫_0^s A^{-1}(x, r^{-n}) dr`.
pub fn morrey_modulus<T: Scalar>(
    m: &dyn NFunction<T>,
    x: &[T],
    s: T,
    tol: T,
) -> Result<QuadratureResult<T>> {
    check_positive("Morrey modulus", s)?;
    if s == T::zero() {
        return Ok(zero_result());
    }
    let sec = m.section_at(x)?;
    modulus_from_zero(sec.as_ref(), m.dim(), s, Tolerance::new(tol))
}

/// `μ(x, s)` by direct quadrature of the tail integral in `τ`.
pub fn morrey_modulus_direct<T: Scalar>(
    m: &dyn NFunction<T>,
    x: &[T],
    s: T,
    tol: T,
) -> Result<QuadratureResult<T>> {
    check_positive("Morrey modulus", s)?;
    if s == T::zero() {
        return Ok(zero_result());
    }
    let n = m.dim();
    let sec = m.section_at(x)?;
    let lower = s.powi(-(n as i32));
    let ceiling = T::max_value() / T::lit(1e20);
    let tol = Tolerance::new(tol);
    let mut f = |tau: T| integrand(sec.as_ref(), n, tau);
    let g = graded(&mut f, Grading::TowardInfinity { lower, ceiling }, tol)?;
    if g.divergent {
        return Err(Error::DivergentTail {
            exponent: g.exponent.map_or(f64::NAN, |e| e.as_f64()),
        });
    }
    require_converged(g.quadrature, tol)
}

/// `μ(x, s)` for many `s` at one point: the smallest by a graded sweep, the
/// rest by integrating the increments between consecutive sorted values.
/// Results are returned in input order.
pub fn morrey_modulus_many<T: Scalar>(
    m: &dyn NFunction<T>,
    x: &[T],
    s: &[T],
    tol: T,
) -> Result<Vec<QuadratureResult<T>>> {
    for &v in s {
        check_positive("Morrey modulus", v)?;
    }
    let n = m.dim();
    let sec = m.section_at(x)?;
    let tol = Tolerance::new(tol);
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[i].partial_cmp(&s[j]).expect("finite"));
    let mut out = vec![zero_result(); s.len()];
    let mut prev: Option<(T, QuadratureResult<T>)> = None;
    for i in order {
        let si = s[i];
        let r = match prev {
            _ if si == T::zero() => zero_result(),
            None => modulus_from_zero(sec.as_ref(), n, si, tol)?,
            Some((sp, rp)) if sp == si => rp,
            Some((sp, rp)) => {
                let mut f = |r: T| modulus_integrand(sec.as_ref(), n, r);
                let step = adaptive(&mut f, sp, si, tol, MAX_SUBDIVISIONS)?;
                let step = require_converged(step, tol)?;
                QuadratureResult {
                    value: rp.value + step.value,
                    abs_error_estimate: rp.abs_error_estimate + step.abs_error_estimate,
                    subdivisions: rp.subdivisions + step.subdivisions,
                    converged: true,
                }
            }
        };
        if si > T::zero() {
            prev = Some((si, r));
        }
        out[i] = r;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusRow<T> {
    pub x: Vec<T>,
    pub s: T,
    pub mu: T,
    pub err: T,
}

/// `μ(x, s)` over `(x, s)` pairs, rows in input order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulusTable<T> {
    pub n: usize,
    pub rows: Vec<ModulusRow<T>>,
}

impl<T: Scalar> ModulusTable<T> {
    /// Every point in `xs` crossed with every `s` in `s_grid`.
    pub fn build(m: &dyn NFunction<T>, xs: &[Vec<T>], s_grid: &[T], tol: T) -> Result<Self> {
        let mut rows = Vec::with_capacity(xs.len() * s_grid.len());
        for x in xs {
            for (&s, r) in s_grid.iter().zip(morrey_modulus_many(m, x, s_grid, tol)?) {
                rows.push(ModulusRow {
                    x: x.clone(),
                    s,
                    mu: r.value,
                    err: r.abs_error_estimate,
                });
            }
        }
        Ok(Self { n: m.dim(), rows })
    }

    pub fn header(&self) -> String {
        let mut h: Vec<String> = (1..=self.n).map(|i| format!("x{i}")).collect();
        h.extend(["s", "mu", "err"].map(String::from));
        h.join(",")
    }

    /// CSV with header `x1,...,xn,s,mu,err` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for row in &self.rows {
            let cells = row.x.iter().chain([&row.s, &row.mu, &row.err]);
            let line: Vec<String> = cells.map(|v| format!("{:.16e}", v.as_f64())).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }
}
