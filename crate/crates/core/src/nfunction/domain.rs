use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{to_f64_vec, Scalar};

/// Axis-aligned box `Ω = Π [lower_i, upper_i]` in dimension `n >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain<T> {
    lower: Vec<T>,
    upper: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainSpec {
    pub n: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl<T: Scalar> Domain<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidDomain(format!(
                "lower has {} coordinates, upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.len() < 2 {
            return Err(Error::InvalidDomain(format!(
                "dimension must be at least 2, got {}",
                lower.len()
            )));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() || !u.is_finite() || l >= u {
                return Err(Error::InvalidDomain(format!(
                    "axis {}: need finite lower < upper, got [{l}, {u}]",
                    i + 1
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The unit cube `[0, 1]^n`.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(vec![T::zero(); n], vec![T::one(); n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    pub fn width(&self, axis: usize) -> T {
        self.upper[axis] - self.lower[axis]
    }

    pub fn volume(&self) -> T {
        (0..self.dim()).fold(T::one(), |acc, i| acc * self.width(i))
    }

    pub fn diameter(&self) -> T {
        (0..self.dim())
            .fold(T::zero(), |acc, i| acc + self.width(i) * self.width(i))
            .sqrt()
    }

    pub fn center(&self) -> Vec<T> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| (l + u) * T::half())
            .collect()
    }

    /// Membership in the closed box, with a rounding allowance of a few ulps
    /// of the box width.
    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim()
            && x.iter().enumerate().all(|(i, &v)| {
                let slack = T::lit(16.0) * T::epsilon() * self.width(i).max(self.upper[i].abs());
                v.is_finite() && v >= self.lower[i] - slack && v <= self.upper[i] + slack
            })
    }

    pub fn check_contains(&self, x: &[T]) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                point: to_f64_vec(x),
            })
        }
    }

    /// Distance from an interior point to `∂Ω` (negative outside).
    pub fn distance_to_boundary(&self, x: &[T]) -> T {
        x.iter()
            .enumerate()
            .map(|(i, &v)| (v - self.lower[i]).min(self.upper[i] - v))
            .fold(T::infinity(), T::min)
    }

    /// Tensor lattice of `k` points per axis over the closed box (corners included).
    pub fn closed_lattice(&self, k: usize) -> Vec<Vec<T>> {
        self.lattice(k, |i, j| {
            if k == 1 {
                T::half()
            } else {
                T::lit(j as f64 / (k - 1) as f64)
            }
            .mul_add(self.width(i), self.lower[i])
        })
    }

    /// Tensor lattice of `k` cell midpoints per axis (strictly interior).
    pub fn interior_lattice(&self, k: usize) -> Vec<Vec<T>> {
        self.lattice(k, |i, j| {
            T::lit((j as f64 + 0.5) / k as f64).mul_add(self.width(i), self.lower[i])
        })
    }

    fn lattice(&self, k: usize, coord: impl Fn(usize, usize) -> T) -> Vec<Vec<T>> {
        let n = self.dim();
        let total = k.pow(n as u32);
        (0..total)
            .map(|mut idx| {
                let mut point = vec![T::zero(); n];
                for axis in (0..n).rev() {
                    point[axis] = coord(axis, idx % k);
                    idx /= k;
                }
                point
            })
            .collect()
    }

    pub fn spec(&self) -> DomainSpec {
        DomainSpec {
            n: self.dim(),
            lower: to_f64_vec(&self.lower),
            upper: to_f64_vec(&self.upper),
        }
    }
}
