//! Monotone one-dimensional root finding and maximisation.
//!
//! Every routine here works on functions of `t >= 0` that are nondecreasing
//! (or unimodal, for [`golden_section_max`]). Brackets are grown and shrunk
//! geometrically with a squaring factor so that roots anywhere between
//! `1e-300` and `1e300` are reached in a few dozen evaluations, then refined
//! in log space until the bracket ratio is small, then linearly.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAX_ITERATIONS: usize = 200;

/// Bracket `[lo, hi]` with `f(lo) < target <= f(hi)`; `lo` may be zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket<T> {
    pub lo: T,
    pub hi: T,
}

/// Finds `[lo, hi]` around the smallest `t >= 0` with `pred(t)` true, for a
/// predicate that is false on an initial segment and true afterwards.
///
/// Returns `lo = 0` when the predicate holds down to the underflow limit.
pub fn bracket_threshold<T, P>(start: T, mut pred: P, what: &'static str) -> Result<Bracket<T>>
where
    T: Scalar,
    P: FnMut(T) -> Result<bool>,
{
    let mut t = if start > T::zero() && start.is_finite() {
        start
    } else {
        T::one()
    };
    let mut factor = T::two();
    if pred(t)? {
        let mut hi = t;
        for _ in 0..MAX_ITERATIONS {
            let next = t / factor;
            if next <= T::min_positive_value() || next == t {
                return Ok(Bracket { lo: T::zero(), hi });
            }
            if !pred(next)? {
                return Ok(Bracket { lo: next, hi });
            }
            hi = next;
            t = next;
            factor = (factor * factor).min(T::lit(1e16));
        }
        Ok(Bracket { lo: T::zero(), hi })
    } else {
        let mut lo = t;
        for _ in 0..MAX_ITERATIONS {
            let next = t * factor;
            if !next.is_finite() {
                return Err(Error::Overflow { what });
            }
            if pred(next)? {
                return Ok(Bracket { lo, hi: next });
            }
            lo = next;
            t = next;
            factor = (factor * factor).min(T::lit(1e16));
        }
        Err(Error::NonConvergence {
            what,
            lo: lo.as_f64(),
            hi: f64::INFINITY,
            iterations: MAX_ITERATIONS,
        })
    }
}

fn split_point<T: Scalar>(b: &Bracket<T>) -> T {
    if b.lo > T::zero() && b.hi / b.lo > T::lit(4.0) {
        (b.lo.ln() * T::half() + b.hi.ln() * T::half()).exp()
    } else if b.lo == T::zero() && b.hi > T::lit(1e-280) {
        // still searching downward in magnitude
        b.hi * T::lit(1e-3)
    } else {
        b.lo + (b.hi - b.lo) * T::half()
    }
}

fn converged<T: Scalar>(b: &Bracket<T>) -> bool {
    b.hi - b.lo <= T::lit(4.0) * T::epsilon() * b.hi || b.hi <= T::min_positive_value()
}

/// Supremum of `{t >= 0 : pred(t)}` for a predicate that is true on an
/// initial segment `[0, t*)` (or `[0, t*]`) and false afterwards.
///
/// This is the generalised inverse used for the conjugate derivative.
pub fn sup_where<T, P>(mut pred: P, what: &'static str) -> Result<T>
where
    T: Scalar,
    P: FnMut(T) -> Result<bool>,
{
    let mut b = bracket_threshold(T::one(), |t| pred(t).map(|ok| !ok), what)?;
    for _ in 0..MAX_ITERATIONS {
        if converged(&b) {
            return Ok(b.lo + (b.hi - b.lo) * T::half());
        }
        let mid = split_point(&b);
        if mid <= b.lo || mid >= b.hi {
            return Ok(b.lo + (b.hi - b.lo) * T::half());
        }
        if pred(mid)? {
            b.lo = mid;
        } else {
            b.hi = mid;
        }
    }
    Err(Error::NonConvergence {
        what,
        lo: b.lo.as_f64(),
        hi: b.hi.as_f64(),
        iterations: MAX_ITERATIONS,
    })
}

/// Solves `f(t) = target` for nondecreasing `f` with `f(0) = 0`, `target >= 0`.
///
/// `df`, when supplied, is the derivative and enables safeguarded Newton
/// steps; otherwise the bracket is bisected.
pub fn solve_increasing<T, F, D>(
    mut f: F,
    mut df: Option<D>,
    target: T,
    start: T,
    what: &'static str,
) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
    D: FnMut(T) -> Result<T>,
{
    if !target.is_finite() || target < T::zero() {
        return Err(Error::NonFinite {
            what,
            value: target.as_f64(),
        });
    }
    if target == T::zero() {
        return Ok(T::zero());
    }
    let mut b = bracket_threshold(start, |t| Ok(f(t)? >= target), what)?;
    let mut x = b.hi;
    let mut fx = f(x)? - target;
    if fx == T::zero() {
        return Ok(x);
    }
    let mut step_old = b.hi - b.lo;
    let mut step = step_old;
    for _ in 0..MAX_ITERATIONS {
        let geometric = b.lo == T::zero() || b.hi / b.lo > T::lit(4.0);
        let mut next = None;
        if !geometric {
            if let Some(df) = df.as_mut() {
                let d = df(x)?;
                if d > T::zero() && d.is_finite() {
                    let candidate = x - fx / d;
                    let inside = candidate > b.lo && candidate < b.hi;
                    if inside && (fx + fx).abs() <= (step_old * d).abs() {
                        step_old = step;
                        step = fx / d;
                        next = Some(candidate);
                    }
                }
            }
        }
        let next = match next {
            Some(v) => v,
            None => {
                step_old = step;
                let mid = split_point(&b);
                step = x - mid;
                mid
            }
        };
        if step.abs() <= T::two() * T::epsilon() * next.abs() || converged(&b) {
            return Ok(next);
        }
        x = next;
        fx = f(x)? - target;
        if fx == T::zero() {
            return Ok(x);
        }
        if fx < T::zero() {
            b.lo = x;
        } else {
            b.hi = x;
        }
    }
    Err(Error::NonConvergence {
        what,
        lo: b.lo.as_f64(),
        hi: b.hi.as_f64(),
        iterations: MAX_ITERATIONS,
    })
}

/// Maximises a unimodal function on `[a, b]`; returns `(argmax, max)`.
pub fn golden_section_max<T, F>(mut f: F, mut a: T, mut b: T) -> Result<(T, T)>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..MAX_ITERATIONS {
        if (b - a).abs() <= T::epsilon().sqrt() * (a.abs() + b.abs()) * T::lit(1e-2) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d)?;
        }
    }
    Ok(if fc > fd { (c, fc) } else { (d, fd) })
}
