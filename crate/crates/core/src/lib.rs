//! Numerical toolkit for generalized N-functions `A(x, t)` on boxes in `Rⁿ`.
//!
//! The numerical core ([`exprlang`], [`nfunction`], [`calculus`],
//! [`modular`]) is generic over [`Scalar`] (`f32` or `f64`). The structural
//! checks in [`conditions`] and the Morrey tooling in [`morrey`] work in `f64`.

pub mod calculus;
pub mod conditions;
pub mod error;
pub mod exprlang;
pub mod modular;
pub mod morrey;
pub mod nfunction;
pub mod quadrature;
pub mod roots;
pub mod scalar;

pub use error::{Error, Result};
pub use exprlang::{parse, Expr};
pub use nfunction::{
    conjugate_model, Conjugate, Custom, Domain, DoublePhase, Family, LogType, Model, NFunction,
    NFunctionExt, Section, SectionExt, VariableExponent,
};
pub use scalar::Scalar;

pub type Domain64 = Domain<f64>;
pub type Domain32 = Domain<f32>;
pub type Model64 = Model<f64>;
pub type Model32 = Model<f32>;
pub type GridFunction64 = modular::GridFunction<f64>;
pub type GridFunction32 = modular::GridFunction<f32>;
