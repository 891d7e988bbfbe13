//! The builtin families and expression-defined custom N-functions.

use std::sync::Arc;

use super::{check_n_function, x_step, Domain, Family, Model, NFunction, Section};
use crate::error::{Error, Result};
use crate::exprlang::Expr;
use crate::scalar::Scalar;

/// Lattice points per axis used to scan coefficient bounds at construction.
fn scan_points(n: usize) -> usize {
    // about 4096 evaluations whatever the dimension, never fewer than 3 per axis
    ((4096f64).powf(1.0 / n as f64).floor() as usize).max(3)
}

/// `(inf, sup)` of a coefficient expression over a lattice of `Ω̄`.
pub(crate) fn coefficient_bounds<T: Scalar>(e: &Expr, domain: &Domain<T>) -> Result<(T, T)> {
    if e.max_var() > domain.dim() {
        return Err(Error::InvalidParameter(format!(
            "`{e}` uses x{} but the domain has dimension {}",
            e.max_var(),
            domain.dim()
        )));
    }
    if e.uses_param() {
        return Err(Error::InvalidParameter(format!(
            "coefficient `{e}` may not depend on t"
        )));
    }
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for x in domain.closed_lattice(scan_points(domain.dim())) {
        let v = e.eval(&x)?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// `∇e(x)` by central differences with step `1e-6` of each box width.
fn coefficient_gradient<T: Scalar>(e: &Expr, domain: &Domain<T>, x: &[T]) -> Result<Vec<T>> {
    if e.is_constant_in_x() {
        return Ok(vec![T::zero(); x.len()]);
    }
    let mut shifted = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = x_step::<T>() * domain.width(i);
            shifted[i] = x[i] + h;
            let up = e.eval(&shifted)?;
            shifted[i] = x[i] - h;
            let down = e.eval(&shifted)?;
            shifted[i] = x[i];
            Ok((up - down) / (h + h))
        })
        .collect()
}

/// `t ln t`-type factor that vanishes at `t = 0`.
fn ln_or_zero<T: Scalar>(t: T) -> T {
    if t > T::zero() {
        t.ln()
    } else {
        T::zero()
    }
}

/// `A(x, t) = t^{p(x)} / p(x)`.
///
/// The complementary function is `s^{q(x)} / q(x)` with `1/p + 1/q = 1`; it
/// is represented by the same type with `dual = true`.
#[derive(Debug, Clone)]
pub struct VariableExponent<T> {
    p: Expr,
    domain: Domain<T>,
    bounds: (T, T),
    dual: bool,
}

impl<T: Scalar> VariableExponent<T> {
    /// Requires `inf p > n`, the regime of the Morrey estimate.
    pub fn new(p: Expr, domain: Domain<T>) -> Result<Self> {
        let m = Self::any_growth(p, domain)?;
        let n = T::lit(m.domain.dim() as f64);
        if m.bounds.0 <= n {
            return Err(Error::InvalidParameter(format!(
                "variable exponent needs inf p > n = {n}, scanned inf p = {}",
                m.bounds.0
            )));
        }
        Ok(m)
    }

    /// Any exponent with `inf p > 1` (an N-function, possibly below `n`).
    pub fn any_growth(p: Expr, domain: Domain<T>) -> Result<Self> {
        let bounds = coefficient_bounds(&p, &domain)?;
        if bounds.0 <= T::one() {
            return Err(Error::InvalidParameter(format!(
                "variable exponent needs inf p > 1, scanned inf p = {}",
                bounds.0
            )));
        }
        Ok(Self {
            p,
            domain,
            bounds,
            dual: false,
        })
    }

    /// Constant exponent `p`, no dimension restriction beyond `p > 1`.
    pub fn constant(p: f64, domain: Domain<T>) -> Result<Self> {
        Self::any_growth(Expr::Literal(p), domain)
    }

    pub fn exponent(&self) -> &Expr {
        &self.p
    }

    /// Scanned `(p₋, p₊)`.
    pub fn exponent_bounds(&self) -> (T, T) {
        self.bounds
    }

    pub fn is_dual(&self) -> bool {
        self.dual
    }

    /// Effective exponent at `x`: `p(x)`, or `q(x) = p/(p-1)` for the dual.
    fn exponent_at(&self, x: &[T]) -> Result<(T, T)> {
        let p = self.p.eval(x)?;
        if p <= T::one() {
            return Err(Error::InvalidParameter(format!("p(x) = {p} <= 1")));
        }
        let q = p / (p - T::one());
        Ok(if self.dual { (q, p) } else { (p, q) })
    }
}

struct PowerSection<T> {
    /// Exponent of this section.
    r: T,
    /// Conjugate exponent.
    r_conj: T,
}

impl<T: Scalar> Section<T> for PowerSection<T> {
    fn value(&self, t: T) -> Result<T> {
        Ok(t.powf(self.r) / self.r)
    }

    fn analytic_derivative(&self, t: T) -> Option<Result<T>> {
        Some(Ok(t.powf(self.r - T::one())))
    }

    fn analytic_inverse(&self, y: T) -> Option<Result<T>> {
        Some(Ok((self.r * y).powf(self.r.recip())))
    }

    fn analytic_conjugate(&self, s: T) -> Option<Result<T>> {
        Some(Ok(s.powf(self.r_conj) / self.r_conj))
    }

    fn analytic_conjugate_derivative(&self, s: T) -> Option<Result<T>> {
        Some(Ok(s.powf((self.r - T::one()).recip())))
    }

    fn analytic_conjugate_inverse(&self, y: T) -> Option<Result<T>> {
        Some(Ok((self.r_conj * y).powf(self.r_conj.recip())))
    }
}

impl<T: Scalar> NFunction<T> for VariableExponent<T> {
    fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    fn family(&self) -> Family {
        Family::VariableExponent
    }

    fn section(&self, x: &[T]) -> Result<Box<dyn Section<T> + '_>> {
        let (r, r_conj) = self.exponent_at(x)?;
        Ok(Box::new(PowerSection { r, r_conj }))
    }

    fn analytic_x_gradient(&self, x: &[T], t: T) -> Option<Result<Vec<T>>> {
        Some((|| {
            let (r, _) = self.exponent_at(x)?;
            let grad_p = coefficient_gradient(&self.p, &self.domain, x)?;
            if t == T::zero() {
                return Ok(vec![T::zero(); x.len()]);
            }
            // d/dr (t^r / r) = t^r (r ln t - 1) / r²
            let d_dr = t.powf(r) * (r * ln_or_zero(t) - T::one()) / (r * r);
            let chain = if self.dual {
                // r = q = p/(p-1), dq/dp = -1/(p-1)²
                let p = self.p.eval(x)?;
                -T::one() / ((p - T::one()) * (p - T::one()))
            } else {
                T::one()
            };
            Ok(grad_p.into_iter().map(|g| g * chain * d_dr).collect())
        })())
    }

    fn analytic_conjugate(&self) -> Option<Model<T>> {
        Some(Arc::new(Self {
            dual: !self.dual,
            ..self.clone()
        }))
    }

    fn growth_exponent_at(&self, x: &[T]) -> Option<T> {
        self.exponent_at(x).ok().map(|(r, _)| r)
    }
}

/// `A(x, t) = t^{p(x)} log(1 + t)`.
#[derive(Debug, Clone)]
pub struct LogType<T> {
    p: Expr,
    domain: Domain<T>,
    bounds: (T, T),
}

impl<T: Scalar> LogType<T> {
    /// Requires `inf p > n`.
    pub fn new(p: Expr, domain: Domain<T>) -> Result<Self> {
        let bounds = coefficient_bounds(&p, &domain)?;
        let n = T::lit(domain.dim() as f64);
        if bounds.0 <= n {
            return Err(Error::InvalidParameter(format!(
                "log-type family needs inf p > n = {n}, scanned inf p = {}",
                bounds.0
            )));
        }
        Ok(Self { p, domain, bounds })
    }

    pub fn exponent_bounds(&self) -> (T, T) {
        self.bounds
    }
}

struct LogSection<T> {
    p: T,
}

impl<T: Scalar> Section<T> for LogSection<T> {
    fn value(&self, t: T) -> Result<T> {
        Ok(t.powf(self.p) * t.ln_1p())
    }

    fn analytic_derivative(&self, t: T) -> Option<Result<T>> {
        let p = self.p;
        Some(Ok(p * t.powf(p - T::one()) * t.ln_1p() + t.powf(p) / (T::one() + t)))
    }
}

impl<T: Scalar> NFunction<T> for LogType<T> {
    fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    fn family(&self) -> Family {
        Family::LogType
    }

    fn section(&self, x: &[T]) -> Result<Box<dyn Section<T> + '_>> {
        Ok(Box::new(LogSection {
            p: self.p.eval(x)?,
        }))
    }

    fn analytic_x_gradient(&self, x: &[T], t: T) -> Option<Result<Vec<T>>> {
        Some((|| {
            let p = self.p.eval(x)?;
            let grad_p = coefficient_gradient(&self.p, &self.domain, x)?;
            let factor = t.powf(p) * ln_or_zero(t) * t.ln_1p();
            Ok(grad_p.into_iter().map(|g| g * factor).collect())
        })())
    }

    fn growth_exponent_at(&self, x: &[T]) -> Option<T> {
        self.p.eval(x).ok()
    }
}

/// `A(x, t) = t^p + α(x) t^q` with constants `q > p`.
#[derive(Debug, Clone)]
pub struct DoublePhase<T> {
    p: T,
    q: T,
    alpha: Expr,
    domain: Domain<T>,
    alpha_bounds: (T, T),
}

impl<T: Scalar> DoublePhase<T> {
    /// Requires `q > p > n` and `inf α > 0`.
    pub fn new(p: T, q: T, alpha: Expr, domain: Domain<T>) -> Result<Self> {
        let n = T::lit(domain.dim() as f64);
        if p <= n {
            return Err(Error::InvalidParameter(format!(
                "double phase needs p > n = {n}, got p = {p}"
            )));
        }
        Self::any_growth(p, q, alpha, domain)
    }

    /// Requires `q > p > 1` and `inf α > 0`.
    pub fn any_growth(p: T, q: T, alpha: Expr, domain: Domain<T>) -> Result<Self> {
        if !(p > T::one() && q > p && q.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "double phase needs q > p > 1, got p = {p}, q = {q}"
            )));
        }
        let alpha_bounds = coefficient_bounds(&alpha, &domain)?;
        if alpha_bounds.0 <= T::zero() {
            return Err(Error::InvalidParameter(format!(
                "double phase needs inf alpha > 0, scanned inf alpha = {}",
                alpha_bounds.0
            )));
        }
        Ok(Self {
            p,
            q,
            alpha,
            domain,
            alpha_bounds,
        })
    }

    pub fn exponents(&self) -> (T, T) {
        (self.p, self.q)
    }

    pub fn alpha_bounds(&self) -> (T, T) {
        self.alpha_bounds
    }
}

struct DoublePhaseSection<T> {
    p: T,
    q: T,
    alpha: T,
}

impl<T: Scalar> Section<T> for DoublePhaseSection<T> {
    fn value(&self, t: T) -> Result<T> {
        Ok(t.powf(self.p) + self.alpha * t.powf(self.q))
    }

    fn analytic_derivative(&self, t: T) -> Option<Result<T>> {
        Some(Ok(self.p * t.powf(self.p - T::one())
            + self.q * self.alpha * t.powf(self.q - T::one())))
    }
}

impl<T: Scalar> NFunction<T> for DoublePhase<T> {
    fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    fn family(&self) -> Family {
        Family::DoublePhase
    }

    fn section(&self, x: &[T]) -> Result<Box<dyn Section<T> + '_>> {
        Ok(Box::new(DoublePhaseSection {
            p: self.p,
            q: self.q,
            alpha: self.alpha.eval(x)?,
        }))
    }

    fn analytic_x_gradient(&self, x: &[T], t: T) -> Option<Result<Vec<T>>> {
        Some((|| {
            let grad_alpha = coefficient_gradient(&self.alpha, &self.domain, x)?;
            let tq = t.powf(self.q);
            Ok(grad_alpha.into_iter().map(|g| g * tq).collect())
        })())
    }

    fn growth_exponent_at(&self, _x: &[T]) -> Option<T> {
        Some(self.q)
    }
}

/// `A(x, t)` given by an expression in `x1 .. xn` and `t`; all calculus is numeric.
#[derive(Debug, Clone)]
pub struct Custom<T> {
    expr: Expr,
    domain: Domain<T>,
}

impl<T: Scalar> Custom<T> {
    /// Builds the model and certifies the N-function axioms on a sample grid.
    pub fn new(expr: Expr, domain: Domain<T>) -> Result<Self> {
        if expr.max_var() > domain.dim() {
            return Err(Error::InvalidParameter(format!(
                "`{expr}` uses x{} but the domain has dimension {}",
                expr.max_var(),
                domain.dim()
            )));
        }
        let m = Self { expr, domain };
        check_n_function(&m, 3)?;
        Ok(m)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

struct ExprSection<'a, T> {
    expr: &'a Expr,
    x: Vec<T>,
}

impl<T: Scalar> Section<T> for ExprSection<'_, T> {
    fn value(&self, t: T) -> Result<T> {
        Ok(self.expr.eval_with(&self.x, Some(t))?)
    }
}

impl<T: Scalar> NFunction<T> for Custom<T> {
    fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    fn family(&self) -> Family {
        Family::Custom
    }

    fn section(&self, x: &[T]) -> Result<Box<dyn Section<T> + '_>> {
        Ok(Box::new(ExprSection {
            expr: &self.expr,
            x: x.to_vec(),
        }))
    }
}
