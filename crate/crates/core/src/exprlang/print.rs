use std::fmt;

use super::{BinOp, Constant, Expr, Func};

// Binding strength, loosest first. A child is parenthesised when it binds
// more loosely than its slot requires.
const ADD: u8 = 1;
const MUL: u8 = 2;
const NEG: u8 = 3;
const POW: u8 = 4;
const ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary(BinOp::Add | BinOp::Sub, ..) => ADD,
        Expr::Binary(BinOp::Mul | BinOp::Div, ..) => MUL,
        Expr::Neg(_) => NEG,
        Expr::Binary(BinOp::Pow, ..) => POW,
        _ => ATOM,
    }
}

struct Slot<'a>(&'a Expr, u8);

impl fmt::Display for Slot<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if precedence(self.0) < self.1 {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // `{:?}` is the shortest representation that parses back to the same bits.
            Expr::Literal(v) => write!(f, "{v:?}"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Param => f.write_str("t"),
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Const(Constant::E) => f.write_str("e"),
            Expr::Neg(e) => write!(f, "-{}", Slot(e, NEG)),
            Expr::Binary(op, l, r) => match op {
                BinOp::Add => write!(f, "{} + {}", Slot(l, ADD), Slot(r, MUL)),
                BinOp::Sub => write!(f, "{} - {}", Slot(l, ADD), Slot(r, MUL)),
                BinOp::Mul => write!(f, "{}*{}", Slot(l, MUL), Slot(r, NEG)),
                BinOp::Div => write!(f, "{}/{}", Slot(l, MUL), Slot(r, NEG)),
                BinOp::Pow => write!(f, "{}^{}", Slot(l, ATOM), Slot(r, NEG)),
            },
            Expr::Call(Func::Norm, _) => f.write_str("norm(x)"),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::exprlang::parse;

    #[test]
    fn minimal_parentheses() {
        for (src, printed) in [
            ("(1+2)*3", "(1.0 + 2.0)*3.0"),
            ("1-(2-3)", "1.0 - (2.0 - 3.0)"),
            ("(2^3)^2", "(2.0^3.0)^2.0"),
            ("2^3^2", "2.0^3.0^2.0"),
            ("(-2)^2", "(-2.0)^2.0"),
            ("-(1+x1)", "-(1.0 + x1)"),
        ] {
            assert_eq!(parse(src).unwrap().to_string(), printed);
        }
    }

    #[test]
    fn prints_functions_and_constants() {
        let e = parse("max(sin(pi*x1), norm(x)) + e^t").unwrap();
        assert_eq!(e.to_string(), "max(sin(pi*x1), norm(x)) + e^t");
    }
}
