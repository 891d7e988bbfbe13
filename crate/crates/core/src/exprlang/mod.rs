//! A small arithmetic language for coefficient functions such as `p(x)`,
//! `alpha(x)` and test functions `u(x)`.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?          (right associative)
//! atom  := number | ident | ident '(' args ')' | '(' expr ')'
//! ```
//!
//! Identifiers are the coordinates `x1 .. xn`, the constants `pi` and `e`, and
//! `t`, the modular argument available to custom N-function expressions.
//! Functions: `sin cos exp log sqrt abs` (one argument), `min max pow`
//! (two arguments) and `norm(x)`, the Euclidean norm of the point.

mod eval;
mod lexer;
mod parser;
mod print;

pub use eval::{EvalError, EvalErrorKind};
pub use parser::{parse, ParseError};

/// Parsed expression tree. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Literal(f64),
    /// Coordinate `x_i`, 1-based.
    Var(usize),
    /// The modular argument `t`.
    Param,
    Const(Constant),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    Min,
    Max,
    Pow,
    /// `norm(x)`; takes no sub-expressions.
    Norm,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            "pow" => Func::Pow,
            "norm" => Func::Norm,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
            Func::Pow => "pow",
            Func::Norm => "norm",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max | Func::Pow => 2,
            Func::Norm => 0,
            _ => 1,
        }
    }
}

impl Expr {
    /// Largest coordinate index referenced (0 when the expression is constant in x).
    pub fn max_var(&self) -> usize {
        match self {
            Expr::Var(i) => *i,
            Expr::Literal(_) | Expr::Param | Expr::Const(_) => 0,
            Expr::Neg(e) => e.max_var(),
            Expr::Binary(_, l, r) => l.max_var().max(r.max_var()),
            Expr::Call(_, args) => args.iter().map(Expr::max_var).max().unwrap_or(0),
        }
    }

    /// Whether `norm(x)` appears, which reads every coordinate.
    pub fn uses_norm(&self) -> bool {
        match self {
            Expr::Call(Func::Norm, _) => true,
            Expr::Neg(e) => e.uses_norm(),
            Expr::Binary(_, l, r) => l.uses_norm() || r.uses_norm(),
            Expr::Call(_, args) => args.iter().any(Expr::uses_norm),
            _ => false,
        }
    }

    pub fn uses_param(&self) -> bool {
        match self {
            Expr::Param => true,
            Expr::Neg(e) => e.uses_param(),
            Expr::Binary(_, l, r) => l.uses_param() || r.uses_param(),
            Expr::Call(_, args) => args.iter().any(Expr::uses_param),
            _ => false,
        }
    }

    /// True when the value does not depend on the point.
    pub fn is_constant_in_x(&self) -> bool {
        self.max_var() == 0 && !self.uses_norm()
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
