use thiserror::Error;

use super::{BinOp, Constant, Expr, Func};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalErrorKind {
    DivisionByZero,
    LogOfNonPositive,
    SqrtOfNegative,
    /// `pow` with no real result (negative base, fractional exponent).
    PowDomain,
    /// Result not representable (infinite).
    Overflow,
    /// `t` used where no modular argument is bound.
    UnboundParameter,
    /// The point has fewer coordinates than the expression uses.
    Dimension { needed: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{} in `{subexpr}`", describe(.kind))]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub subexpr: String,
}

impl EvalError {
    pub fn is_overflow(&self) -> bool {
        self.kind == EvalErrorKind::Overflow
    }
}

fn describe(kind: &EvalErrorKind) -> String {
    match kind {
        EvalErrorKind::DivisionByZero => "division by zero".into(),
        EvalErrorKind::LogOfNonPositive => "log of non-positive value".into(),
        EvalErrorKind::SqrtOfNegative => "sqrt of negative value".into(),
        EvalErrorKind::PowDomain => "pow has no real value".into(),
        EvalErrorKind::Overflow => "overflow".into(),
        EvalErrorKind::UnboundParameter => "modular argument `t` is not bound here".into(),
        EvalErrorKind::Dimension { needed, got } => {
            format!("expression uses x{needed} but the point has {got} coordinates")
        }
    }
}

impl Expr {
    /// Evaluates at `point` (no modular argument bound).
    pub fn eval<T: Scalar>(&self, point: &[T]) -> Result<T, EvalError> {
        self.eval_with(point, None)
    }

    /// Evaluates at `point` with `t` bound to `param` when given.
    pub fn eval_with<T: Scalar>(&self, point: &[T], param: Option<T>) -> Result<T, EvalError> {
        let fail = |kind| EvalError {
            kind,
            subexpr: self.to_string(),
        };
        let v = match self {
            Expr::Literal(v) => T::lit(*v),
            Expr::Var(i) => *point.get(i - 1).ok_or_else(|| {
                fail(EvalErrorKind::Dimension {
                    needed: *i,
                    got: point.len(),
                })
            })?,
            Expr::Param => param.ok_or_else(|| fail(EvalErrorKind::UnboundParameter))?,
            Expr::Const(Constant::Pi) => T::lit(std::f64::consts::PI),
            Expr::Const(Constant::E) => T::lit(std::f64::consts::E),
            Expr::Neg(e) => -e.eval_with(point, param)?,
            Expr::Binary(op, l, r) => {
                let a = l.eval_with(point, param)?;
                let b = r.eval_with(point, param)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == T::zero() {
                            return Err(fail(EvalErrorKind::DivisionByZero));
                        }
                        a / b
                    }
                    BinOp::Pow => pow(a, b).map_err(fail)?,
                }
            }
            Expr::Call(func, args) => {
                let arg = |k: usize| args[k].eval_with(point, param);
                match func {
                    Func::Sin => arg(0)?.sin(),
                    Func::Cos => arg(0)?.cos(),
                    Func::Exp => arg(0)?.exp(),
                    Func::Log => {
                        let a = arg(0)?;
                        if a <= T::zero() {
                            return Err(fail(EvalErrorKind::LogOfNonPositive));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        let a = arg(0)?;
                        if a < T::zero() {
                            return Err(fail(EvalErrorKind::SqrtOfNegative));
                        }
                        a.sqrt()
                    }
                    Func::Abs => arg(0)?.abs(),
                    Func::Min => arg(0)?.min(arg(1)?),
                    Func::Max => arg(0)?.max(arg(1)?),
                    Func::Pow => pow(arg(0)?, arg(1)?).map_err(fail)?,
                    Func::Norm => point
                        .iter()
                        .fold(T::zero(), |acc, &c| acc + c * c)
                        .sqrt(),
                }
            }
        };
        if v.is_nan() {
            // only reachable through inf - inf and friends
            return Err(fail(EvalErrorKind::Overflow));
        }
        if v.is_infinite() {
            return Err(fail(EvalErrorKind::Overflow));
        }
        Ok(v)
    }
}

fn pow<T: Scalar>(base: T, exponent: T) -> Result<T, EvalErrorKind> {
    if base == T::zero() && exponent < T::zero() {
        return Err(EvalErrorKind::DivisionByZero);
    }
    let v = base.powf(exponent);
    if v.is_nan() {
        return Err(EvalErrorKind::PowDomain);
    }
    Ok(v)
}
