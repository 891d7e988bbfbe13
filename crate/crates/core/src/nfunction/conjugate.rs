use std::sync::Arc;

use super::{Domain, Family, Model, NFunction, NFunctionExt, Section, SectionExt};
use crate::error::Result;
use crate::scalar::Scalar;

/// The Young complementary function `Ã` of a model, computed numerically.
///
/// Its `x`-gradient uses `∇ₓÃ(x, s) = -∇_y A(y, ã(x, s))|_{y=x}`, so no
/// conjugation is ever differentiated numerically.
#[derive(Debug, Clone)]
pub struct Conjugate<T> {
    inner: Model<T>,
    force_numeric: bool,
}

impl<T: Scalar> Conjugate<T> {
    /// Uses the inner sections' closed forms where they exist.
    pub fn new(inner: Model<T>) -> Self {
        Self {
            inner,
            force_numeric: false,
        }
    }

    /// Always conjugates numerically, even when closed forms exist.
    pub fn numeric(inner: Model<T>) -> Self {
        Self {
            inner,
            force_numeric: true,
        }
    }

    pub fn inner(&self) -> &Model<T> {
        &self.inner
    }
}

/// `Ã` for `model`: the closed form when the family has one, otherwise [`Conjugate`].
pub fn conjugate_model<T: Scalar>(model: &Model<T>) -> Model<T> {
    model
        .analytic_conjugate()
        .unwrap_or_else(|| Arc::new(Conjugate::new(model.clone())))
}

struct ConjugateSection<'a, T> {
    inner: Box<dyn Section<T> + 'a>,
    force_numeric: bool,
}

impl<T: Scalar> Section<T> for ConjugateSection<'_, T> {
    fn value(&self, s: T) -> Result<T> {
        if self.force_numeric {
            self.inner.numeric_conjugate(s)
        } else {
            self.inner.conjugate(s)
        }
    }

    fn analytic_derivative(&self, s: T) -> Option<Result<T>> {
        Some(if self.force_numeric {
            self.inner.numeric_conjugate_derivative(s)
        } else {
            self.inner.conjugate_derivative(s)
        })
    }

    fn analytic_conjugate(&self, t: T) -> Option<Result<T>> {
        (!self.force_numeric).then(|| self.inner.value(t))
    }

    fn analytic_conjugate_derivative(&self, t: T) -> Option<Result<T>> {
        (!self.force_numeric).then(|| self.inner.derivative(t))
    }

    fn analytic_conjugate_inverse(&self, y: T) -> Option<Result<T>> {
        (!self.force_numeric).then(|| self.inner.inverse(y))
    }
}

impl<T: Scalar> NFunction<T> for Conjugate<T> {
    fn domain(&self) -> &Domain<T> {
        self.inner.domain()
    }

    fn family(&self) -> Family {
        Family::Custom
    }

    fn section(&self, x: &[T]) -> Result<Box<dyn Section<T> + '_>> {
        Ok(Box::new(ConjugateSection {
            inner: self.inner.section(x)?,
            force_numeric: self.force_numeric,
        }))
    }

    fn analytic_x_gradient(&self, x: &[T], s: T) -> Option<Result<Vec<T>>> {
        Some((|| {
            let t = self.inner.section(x)?.conjugate_derivative(s)?;
            let g = self.inner.grad_x(x, t)?;
            Ok(g.into_iter().map(|v| -v).collect())
        })())
    }

    fn analytic_conjugate(&self) -> Option<Model<T>> {
        (!self.force_numeric).then(|| self.inner.clone())
    }

    fn growth_exponent_at(&self, x: &[T]) -> Option<T> {
        self.inner
            .growth_exponent_at(x)
            .map(|r| r / (r - T::one()))
    }
}
