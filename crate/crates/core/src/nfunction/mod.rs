//! Generalized N-functions `A(x, t)` on a box `Ω`, the builtin families and
//! the pointwise calculus: Musielak derivative, inverse in `t`, gradient in
//! `x`, and the Young complementary function with its derivative and inverse.
//!
//! A model is split into *sections*: `A(x0, ·)` for a fixed point `x0`.
//! Sections carry the per-point coefficients (for example `p(x0)`) so that
//! repeated one-dimensional work (inversion, conjugation) does not re-evaluate
//! coefficient expressions.

mod conjugate;
mod domain;
mod families;

use std::fmt::Debug;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{golden_section_max, solve_increasing, sup_where};
use crate::scalar::{to_f64_vec, Scalar};

pub use conjugate::{conjugate_model, Conjugate};
pub use domain::{Domain, DomainSpec};
pub use families::{Custom, DoublePhase, LogType, VariableExponent};

/// Shared, immutable N-function model.
pub type Model<T> = Arc<dyn NFunction<T>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    VariableExponent,
    LogType,
    DoublePhase,
    Custom,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::VariableExponent => "variable-exponent",
            Family::LogType => "log-type",
            Family::DoublePhase => "double-phase",
            Family::Custom => "custom",
        }
    }
}

/// `t ↦ A(x0, t)` for `t >= 0` at a fixed point `x0`.
///
/// Only `value` is required; the `analytic_*` hooks return `None` when no
/// closed form exists and the numeric paths in [`SectionExt`] take over.
pub trait Section<T: Scalar>: Send + Sync {
    fn value(&self, t: T) -> Result<T>;

    fn analytic_derivative(&self, _t: T) -> Option<Result<T>> {
        None
    }

    fn analytic_inverse(&self, _y: T) -> Option<Result<T>> {
        None
    }

    fn analytic_conjugate(&self, _s: T) -> Option<Result<T>> {
        None
    }

    fn analytic_conjugate_derivative(&self, _s: T) -> Option<Result<T>> {
        None
    }

    fn analytic_conjugate_inverse(&self, _y: T) -> Option<Result<T>> {
        None
    }
}

/// A generalized N-function over a box domain.
pub trait NFunction<T: Scalar>: Send + Sync + Debug {
    fn domain(&self) -> &Domain<T>;

    fn family(&self) -> Family;

    /// The section at `x`; callers guarantee `x` lies in the closed domain.
    fn section(&self, x: &[T]) -> Result<Box<dyn Section<T> + '_>>;

    fn analytic_x_gradient(&self, _x: &[T], _t: T) -> Option<Result<Vec<T>>> {
        None
    }

    /// Closed-form complementary function, when the family has one.
    fn analytic_conjugate(&self) -> Option<Model<T>> {
        None
    }

    /// Power `r` with `A(x, t) ≈ t^r` (up to slower factors) as `t → ∞`.
    fn growth_exponent_at(&self, _x: &[T]) -> Option<T> {
        None
    }
}

/// One-dimensional calculus on a section. Arguments are `t, s, y >= 0`.
pub trait SectionExt<T: Scalar>: Section<T> {
    /// Right derivative `a(x0, t)`; right-sided difference when no closed form.
    fn derivative(&self, t: T) -> Result<T> {
        if let Some(a) = self.analytic_derivative(t) {
            return a;
        }
        if t == T::zero() {
            return Ok(T::zero());
        }
        self.numeric_derivative(t)
    }

    /// Second-order right-sided difference on `t, t + h, t + 2h` with
    /// `h = ε^{1/3} max(t, 1)`.
    fn numeric_derivative(&self, t: T) -> Result<T> {
        let h = T::epsilon().cbrt() * t.max(T::one());
        let (f0, f1, f2) = (self.value(t)?, self.value(t + h)?, self.value(t + h + h)?);
        Ok((T::lit(4.0) * f1 - T::lit(3.0) * f0 - f2) / (h + h))
    }

    /// `A^{-1}(x0, y)`.
    fn inverse(&self, y: T) -> Result<T> {
        if let Some(v) = self.analytic_inverse(y) {
            return v;
        }
        self.numeric_inverse(y)
    }

    fn numeric_inverse(&self, y: T) -> Result<T> {
        let has_derivative = self.analytic_derivative(T::one()).is_some();
        let derivative = |t: T| self.derivative(t);
        solve_increasing(
            |t| self.value(t),
            has_derivative.then_some(derivative),
            y,
            T::one(),
            "inverse of A",
        )
    }

    /// `Ã(x0, s) = sup_t (s t - A(x0, t))`.
    fn conjugate(&self, s: T) -> Result<T> {
        if let Some(v) = self.analytic_conjugate(s) {
            return v;
        }
        self.numeric_conjugate(s)
    }

    /// Conjugation through the first-order condition `a(x0, t) = s`, with a
    /// golden-section fallback when `a` jumps across `s`.
    fn numeric_conjugate(&self, s: T) -> Result<T> {
        if s == T::zero() {
            return Ok(T::zero());
        }
        let t_star = self.numeric_conjugate_derivative(s)?;
        let mut best = s * t_star - self.value(t_star)?;
        let slope = self.derivative(t_star)?;
        if (slope - s).abs() > T::lit(1e-6) * s.max(T::one()) {
            let lo = t_star * T::half();
            let hi = t_star * T::two() + T::fd_step();
            let (_, v) = golden_section_max(|t| Ok(s * t - self.value(t)?), lo, hi)?;
            best = best.max(v);
        }
        Ok(best.max(T::zero()))
    }

    /// `ã(x0, s) = sup{t >= 0 : a(x0, t) <= s}`.
    fn conjugate_derivative(&self, s: T) -> Result<T> {
        if let Some(v) = self.analytic_conjugate_derivative(s) {
            return v;
        }
        self.numeric_conjugate_derivative(s)
    }

    fn numeric_conjugate_derivative(&self, s: T) -> Result<T> {
        sup_where(|t| Ok(self.derivative(t)? <= s), "conjugate derivative")
    }

    /// `Ã^{-1}(x0, y)`.
    fn inverse_conjugate(&self, y: T) -> Result<T> {
        if let Some(v) = self.analytic_conjugate_inverse(y) {
            return v;
        }
        solve_increasing(
            |s| self.conjugate(s),
            Some(|s| self.conjugate_derivative(s)),
            y,
            T::one(),
            "inverse of the conjugate",
        )
    }
}

impl<T: Scalar, S: Section<T> + ?Sized> SectionExt<T> for S {}

fn check_finite<T: Scalar>(what: &'static str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite {
            what,
            value: v.as_f64(),
        })
    }
}

fn check_nonnegative<T: Scalar>(what: &'static str, v: T) -> Result<()> {
    check_finite(what, v)?;
    if v < T::zero() {
        return Err(Error::InvalidParameter(format!(
            "{what} needs a nonnegative argument, got {v}"
        )));
    }
    Ok(())
}

fn signed<T: Scalar>(t: T, magnitude: T) -> T {
    if t < T::zero() {
        -magnitude
    } else {
        magnitude
    }
}

/// Relative step of the central differences in `x`.
pub fn x_step<T: Scalar>() -> T {
    T::lit(1e-6).max(T::epsilon().cbrt())
}

/// Pointwise operations on a model, with domain and argument checks.
/// Even functions are evaluated at `|t|`; derivatives get the odd extension.
pub trait NFunctionExt<T: Scalar>: NFunction<T> {
    fn dim(&self) -> usize {
        self.domain().dim()
    }

    /// The section at `x` after checking `x ∈ Ω̄`.
    fn section_at(&self, x: &[T]) -> Result<Box<dyn Section<T> + '_>> {
        self.domain().check_contains(x)?;
        self.section(x)
    }

    /// `A(x, t)`.
    fn eval(&self, x: &[T], t: T) -> Result<T> {
        check_finite("A", t)?;
        self.section_at(x)?.value(t.abs())
    }

    /// Musielak derivative `a(x, t)`, odd in `t`.
    fn derivative(&self, x: &[T], t: T) -> Result<T> {
        check_finite("a", t)?;
        Ok(signed(t, self.section_at(x)?.derivative(t.abs())?))
    }

    /// `A^{-1}(x, y)` for `y >= 0`.
    fn inverse(&self, x: &[T], y: T) -> Result<T> {
        check_nonnegative("inverse of A", y)?;
        self.section_at(x)?.inverse(y)
    }

    /// `∇ₓA(x, t)`; `x` must be at least one difference step inside `Ω`.
    fn grad_x(&self, x: &[T], t: T) -> Result<Vec<T>> {
        check_finite("grad_x A", t)?;
        let domain = self.domain();
        domain.check_contains(x)?;
        let steps: Vec<T> = (0..domain.dim())
            .map(|i| x_step::<T>() * domain.width(i))
            .collect();
        for (i, &h) in steps.iter().enumerate() {
            if x[i] - h < domain.lower()[i] || x[i] + h > domain.upper()[i] {
                return Err(Error::TooCloseToBoundary {
                    point: to_f64_vec(x),
                    margin: h.as_f64(),
                });
            }
        }
        let t = t.abs();
        if let Some(g) = self.analytic_x_gradient(x, t) {
            return g;
        }
        let mut shifted = x.to_vec();
        steps
            .iter()
            .enumerate()
            .map(|(i, &h)| {
                shifted[i] = x[i] + h;
                let up = self.section(&shifted)?.value(t)?;
                shifted[i] = x[i] - h;
                let down = self.section(&shifted)?.value(t)?;
                shifted[i] = x[i];
                Ok((up - down) / (h + h))
            })
            .collect()
    }

    /// `Ã(x, s)`.
    fn conjugate(&self, x: &[T], s: T) -> Result<T> {
        check_finite("conjugate", s)?;
        self.section_at(x)?.conjugate(s.abs())
    }

    /// `ã(x, s)`, odd in `s`.
    fn conjugate_derivative(&self, x: &[T], s: T) -> Result<T> {
        check_finite("conjugate derivative", s)?;
        Ok(signed(s, self.section_at(x)?.conjugate_derivative(s.abs())?))
    }

    /// `Ã^{-1}(x, y)` for `y >= 0`.
    fn inverse_conjugate(&self, x: &[T], y: T) -> Result<T> {
        check_nonnegative("inverse of the conjugate", y)?;
        self.section_at(x)?.inverse_conjugate(y)
    }
}

impl<T: Scalar, N: NFunction<T> + ?Sized> NFunctionExt<T> for N {}

/// Sample-grid certification of the N-function axioms at every lattice
/// point: `A(x,0) = 0`, positivity, midpoint convexity (relative slack
/// `1e-12`), `A/t → 0` at zero and `A/t → ∞` at infinity (log-log slope of
/// `A(t)/t` positive on the extreme decades, or overflow at the top).
pub fn check_n_function<T: Scalar>(model: &dyn NFunction<T>, points_per_axis: usize) -> Result<()> {
    let grid: Vec<T> = (-24..=24).map(|k| T::lit(10f64.powf(k as f64 / 4.0))).collect();
    let slack = T::lit(1e-12);
    for x in model.domain().closed_lattice(points_per_axis) {
        let sec = model.section(&x)?;
        let zero = sec.value(T::zero())?;
        if zero != T::zero() {
            return Err(Error::InvalidParameter(format!(
                "A(x, 0) = {zero} at x = {:?}",
                to_f64_vec(&x)
            )));
        }
        let mut values = Vec::with_capacity(grid.len());
        for &t in &grid {
            match sec.value(t) {
                Ok(v) => values.push(Some(v)),
                Err(e) if e.is_overflow() => values.push(None),
                Err(e) => return Err(e),
            }
        }
        for (i, v) in values.iter().enumerate() {
            if let Some(v) = v {
                if *v <= T::zero() {
                    return Err(Error::InvalidParameter(format!(
                        "A(x, {}) = {v} is not positive at x = {:?}",
                        grid[i],
                        to_f64_vec(&x)
                    )));
                }
            }
        }
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mid = (a + b) * T::half();
            let (Ok(fa), Ok(fb), Ok(fm)) = (sec.value(a), sec.value(b), sec.value(mid)) else {
                continue;
            };
            let avg = (fa + fb) * T::half();
            if fm > avg + slack * avg {
                return Err(Error::InvalidParameter(format!(
                    "A(x, ·) is not convex near t = {mid} at x = {:?}",
                    to_f64_vec(&x)
                )));
            }
        }
        let slope = |i: usize, j: usize| -> Option<T> {
            let (vi, vj) = (values[i]?, values[j]?);
            Some(((vj / grid[j]).ln() - (vi / grid[i]).ln()) / (grid[j].ln() - grid[i].ln()))
        };
        match slope(0, 4) {
            Some(s) if s > T::zero() => {}
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "A(x, t)/t does not vanish as t → 0 at x = {:?}",
                    to_f64_vec(&x)
                )))
            }
        }
        let last = grid.len() - 1;
        let top_ok = values[last].is_none() || slope(last - 4, last).is_some_and(|s| s > T::zero());
        if !top_ok {
            return Err(Error::InvalidParameter(format!(
                "A(x, t)/t does not grow without bound at x = {:?}",
                to_f64_vec(&x)
            )));
        }
    }
    Ok(())
}
