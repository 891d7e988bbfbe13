//! Functions sampled at cell midpoints of a uniform lattice on `Ω`, their
//! modular integrals `∫ A(x, |u|/λ) dx`, Luxemburg norms and discrete
//! gradients.

mod io;

use crate::error::{Error, Result};
use crate::exprlang::Expr;
use crate::nfunction::{conjugate_model, Domain, Model, NFunction, NFunctionExt, Section};
use crate::roots::MAX_ITERATIONS;
use crate::scalar::{CompensatedSum, Scalar};

/// Smallest admissible number of cells per axis.
pub const MIN_RESOLUTION: usize = 4;

/// Values at the `mⁿ` cell midpoints, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    domain: Domain<T>,
    resolution: usize,
    values: Vec<T>,
}

impl<T: Scalar> GridFunction<T> {
    pub fn new(domain: Domain<T>, resolution: usize, values: Vec<T>) -> Result<Self> {
        if resolution < MIN_RESOLUTION {
            return Err(Error::Grid(format!(
                "resolution must be at least {MIN_RESOLUTION}, got {resolution}"
            )));
        }
        let expected = resolution
            .checked_pow(domain.dim() as u32)
            .ok_or_else(|| Error::Grid("lattice size overflows".to_string()))?;
        if values.len() != expected {
            return Err(Error::Grid(format!(
                "expected {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Grid(format!("value {i} is not finite")));
        }
        Ok(Self {
            domain,
            resolution,
            values,
        })
    }

    /// Samples `f` at the cell midpoints.
    pub fn from_fn<F>(domain: Domain<T>, resolution: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(&[T]) -> Result<T>,
    {
        let shape = Self::shape_only(&domain, resolution)?;
        let mut values = Vec::with_capacity(shape.len());
        let mut x = vec![T::zero(); domain.dim()];
        for flat in 0..shape.len() {
            let cell = shape.multi_index(flat);
            shape.center_into(&cell, &mut x);
            let v = f(&x).map_err(|e| Error::Cell {
                cell: cell.clone(),
                source: Box::new(e),
            })?;
            if !v.is_finite() {
                return Err(Error::Cell {
                    cell,
                    source: Box::new(Error::NonFinite {
                        what: "grid sample",
                        value: v.as_f64(),
                    }),
                });
            }
            values.push(v);
        }
        Self::new(domain, resolution, values)
    }

    /// Zero grid used to compute lattice geometry before values exist.
    fn shape_only(domain: &Domain<T>, resolution: usize) -> Result<Self> {
        let len = resolution
            .checked_pow(domain.dim() as u32)
            .ok_or_else(|| Error::Grid("lattice size overflows".to_string()))?;
        Self::new(domain.clone(), resolution, vec![T::zero(); len])
    }

    pub fn domain(&self) -> &Domain<T> {
        &self.domain
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Cell width along `axis`.
    pub fn spacing(&self, axis: usize) -> T {
        self.domain.width(axis) / T::lit(self.resolution as f64)
    }

    pub fn cell_volume(&self) -> T {
        (0..self.dim()).fold(T::one(), |acc, i| acc * self.spacing(i))
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut cell = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            cell[axis] = flat % self.resolution;
            flat /= self.resolution;
        }
        cell
    }

    pub fn flat_index(&self, cell: &[usize]) -> usize {
        cell.iter().fold(0, |acc, &c| acc * self.resolution + c)
    }

    fn center_into(&self, cell: &[usize], x: &mut [T]) {
        for (axis, &c) in cell.iter().enumerate() {
            x[axis] = (T::lit(c as f64) + T::half()).mul_add(self.spacing(axis), self.domain.lower()[axis]);
        }
    }

    pub fn cell_center(&self, cell: &[usize]) -> Vec<T> {
        let mut x = vec![T::zero(); self.dim()];
        self.center_into(cell, &mut x);
        x
    }

    /// All cell midpoints in storage order.
    pub fn centers(&self) -> Vec<Vec<T>> {
        (0..self.len())
            .map(|i| self.cell_center(&self.multi_index(i)))
            .collect()
    }

    /// The cell containing `y`, clamped to the lattice.
    pub fn nearest_cell(&self, y: &[T]) -> Vec<usize> {
        (0..self.dim())
            .map(|axis| {
                let rel = (y[axis] - self.domain.lower()[axis]) / self.spacing(axis);
                let c = rel.floor().to_i64().unwrap_or(0);
                c.clamp(0, self.resolution as i64 - 1) as usize
            })
            .collect()
    }

    /// Sample at the midpoint nearest to `y`.
    pub fn nearest_value(&self, y: &[T]) -> T {
        self.values[self.flat_index(&self.nearest_cell(y))]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(
            self.domain.clone(),
            self.resolution,
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn scale(&self, alpha: T) -> Result<Self> {
        self.map(|v| v * alpha)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_lattice(other)?;
        Self::new(
            self.domain.clone(),
            self.resolution,
            self.values.iter().zip(&other.values).map(|(&a, &b)| a + b).collect(),
        )
    }

    fn check_same_lattice(&self, other: &Self) -> Result<()> {
        if self.domain != other.domain || self.resolution != other.resolution {
            return Err(Error::Grid("grid functions live on different lattices".to_string()));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == T::zero())
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }
}

/// Midpoint samples of an expression; evaluation errors name the cell.
pub fn sample<T: Scalar>(e: &Expr, domain: &Domain<T>, resolution: usize) -> Result<GridFunction<T>> {
    if e.max_var() > domain.dim() {
        return Err(Error::InvalidParameter(format!(
            "`{e}` uses x{} but the domain has dimension {}",
            e.max_var(),
            domain.dim()
        )));
    }
    if e.uses_param() {
        return Err(Error::InvalidParameter(format!(
            "grid function `{e}` may not depend on t"
        )));
    }
    GridFunction::from_fn(domain.clone(), resolution, |x| Ok(e.eval(x)?))
}

/// Per-cell sections of a model over a lattice, for repeated modular sums.
pub struct Modular<'a, T> {
    sections: Vec<Box<dyn Section<T> + 'a>>,
    magnitudes: Vec<T>,
    volume: T,
    resolution: usize,
    dim: usize,
}

impl<'a, T: Scalar> Modular<'a, T> {
    pub fn new(m: &'a dyn NFunction<T>, u: &GridFunction<T>) -> Result<Self> {
        if m.domain() != u.domain() {
            return Err(Error::Grid(
                "grid function and model live on different domains".to_string(),
            ));
        }
        let sections = u
            .centers()
            .iter()
            .enumerate()
            .map(|(i, x)| {
                m.section_at(x).map_err(|e| Error::Cell {
                    cell: u.multi_index(i),
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            sections,
            magnitudes: u.values().iter().map(|v| v.abs()).collect(),
            volume: u.cell_volume(),
            resolution: u.resolution(),
            dim: u.dim(),
        })
    }

    /// `Σ A(x_c, |u_c|/λ) |cell|`; `+∞` on overflow.
    pub fn integral(&self, lambda: T) -> Result<T> {
        if lambda.is_nan() || lambda <= T::zero() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        let mut sum = CompensatedSum::new();
        for (i, (sec, &u)) in self.sections.iter().zip(&self.magnitudes).enumerate() {
            if u == T::zero() {
                continue;
            }
            let v = match sec.value(u / lambda) {
                Ok(v) => v,
                Err(e) if e.is_overflow() => return Ok(T::infinity()),
                Err(e) => {
                    return Err(Error::Cell {
                        cell: self.multi_index(i),
                        source: Box::new(e),
                    })
                }
            };
            if !v.is_finite() {
                return Ok(T::infinity());
            }
            sum.add(v);
        }
        Ok(sum.value() * self.volume)
    }

    fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut cell = vec![0; self.dim];
        for axis in (0..self.dim).rev() {
            cell[axis] = flat % self.resolution;
            flat /= self.resolution;
        }
        cell
    }

    pub fn is_zero(&self) -> bool {
        self.magnitudes.iter().all(|&v| v == T::zero())
    }

    /// `inf{λ > 0 : integral(λ) <= 1}`, located to `|integral(λ) - 1| <= tol`.
    pub fn luxemburg_norm(&self, tol: T) -> Result<T> {
        if self.is_zero() {
            return Ok(T::zero());
        }
        if tol.is_nan() || tol <= T::zero() {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
        }
        let max = self.magnitudes.iter().fold(T::zero(), |a, &b| a.max(b));
        // bracket [lo, hi] with rho(lo) > 1 >= rho(hi)
        let mut lambda = max;
        let mut rho = self.integral(lambda)?;
        let (lo, rho_lo, hi, rho_hi);
        let mut guard = 0;
        if rho > T::one() {
            loop {
                let next = lambda * T::two();
                let r = self.integral(next)?;
                guard += 1;
                if r <= T::one() {
                    (lo, rho_lo, hi, rho_hi) = (lambda, rho, next, r);
                    break;
                }
                (lambda, rho) = (next, r);
                if guard > 4 * MAX_ITERATIONS || !next.is_finite() {
                    return Err(bracket_failure(lambda));
                }
            }
        } else {
            loop {
                let next = lambda * T::half();
                let r = self.integral(next)?;
                guard += 1;
                if r > T::one() {
                    (lo, rho_lo, hi, rho_hi) = (next, r, lambda, rho);
                    break;
                }
                (lambda, rho) = (next, r);
                if guard > 4 * MAX_ITERATIONS || next <= T::min_positive_value() {
                    return Err(bracket_failure(lambda));
                }
            }
        }
        if (rho_hi - T::one()).abs() <= tol {
            return Ok(hi);
        }
        // Illinois regula falsi on ln rho against ln lambda, which is linear
        // for power-type models
        let g = |r: T| r.ln();
        let (mut a, mut ga) = (lo.ln(), g(rho_lo));
        let (mut b, mut gb) = (hi.ln(), g(rho_hi));
        let mut side = 0i8;
        for _ in 0..MAX_ITERATIONS {
            let mid = if ga.is_finite() && gb.is_finite() && ga != gb {
                b - gb * (b - a) / (gb - ga)
            } else {
                (a + b) * T::half()
            };
            let mid = if mid > a.min(b) && mid < a.max(b) { mid } else { (a + b) * T::half() };
            let lambda = mid.exp();
            let r = self.integral(lambda)?;
            if (r - T::one()).abs() <= tol {
                return Ok(lambda);
            }
            if (a - b).abs() <= T::lit(4.0) * T::epsilon() * a.abs().max(T::one()) {
                return Ok(lambda);
            }
            let gm = g(r);
            if gm > T::zero() {
                (a, ga) = (mid, gm);
                if side == -1 {
                    gb = gb * T::half();
                }
                side = -1;
            } else {
                (b, gb) = (mid, gm);
                if side == 1 {
                    ga = ga * T::half();
                }
                side = 1;
            }
        }
        Err(Error::NonConvergence {
            what: "Luxemburg norm",
            lo: a.exp().as_f64(),
            hi: b.exp().as_f64(),
            iterations: MAX_ITERATIONS,
        })
    }
}

fn bracket_failure<T: Scalar>(lambda: T) -> Error {
    Error::NonConvergence {
        what: "Luxemburg norm bracket (the modular never crosses 1)",
        lo: lambda.as_f64(),
        hi: lambda.as_f64(),
        iterations: 4 * MAX_ITERATIONS,
    }
}

/// Midpoint-rule `∫_Ω A(x, |u(x)|/λ) dx`.
pub fn modular_integral<T: Scalar>(m: &dyn NFunction<T>, u: &GridFunction<T>, lambda: T) -> Result<T> {
    Modular::new(m, u)?.integral(lambda)
}

/// Default tolerance on `|modular - 1|` for the norm.
pub const NORM_TOL: f64 = 1e-9;

/// Luxemburg norm `‖u‖_A`.
pub fn luxemburg_norm<T: Scalar>(m: &dyn NFunction<T>, u: &GridFunction<T>, tol: T) -> Result<T> {
    Modular::new(m, u)?.luxemburg_norm(tol)
}

/// Discrete gradient: central differences inside, second-order one-sided
/// differences on boundary cells.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField<T> {
    /// `components[axis][cell]`.
    pub components: Vec<Vec<T>>,
    pub magnitude: GridFunction<T>,
}

pub fn gradient<T: Scalar>(u: &GridFunction<T>) -> Result<GradientField<T>> {
    let n = u.dim();
    let m = u.resolution();
    let len = u.len();
    let v = u.values();
    let mut components = vec![vec![T::zero(); len]; n];
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    for (axis, comp) in components.iter_mut().enumerate() {
        let stride = m.pow((n - 1 - axis) as u32);
        let two_h = T::two() * u.spacing(axis);
        for (flat, out) in comp.iter_mut().enumerate() {
            let c = (flat / stride) % m;
            *out = if c == 0 {
                (-three * v[flat] + four * v[flat + stride] - v[flat + 2 * stride]) / two_h
            } else if c == m - 1 {
                (three * v[flat] - four * v[flat - stride] + v[flat - 2 * stride]) / two_h
            } else {
                (v[flat + stride] - v[flat - stride]) / two_h
            };
        }
    }
    let magnitude: Vec<T> = (0..len)
        .map(|i| components.iter().map(|c| c[i] * c[i]).sum::<T>().sqrt())
        .collect();
    Ok(GradientField {
        components,
        magnitude: GridFunction::new(u.domain().clone(), m, magnitude)?,
    })
}

/// `‖ |∇u| ‖_A`.
pub fn gradient_norm<T: Scalar>(m: &dyn NFunction<T>, u: &GridFunction<T>, tol: T) -> Result<T> {
    luxemburg_norm(m, &gradient(u)?.magnitude, tol)
}

/// `‖u‖_A + ‖∇u‖_A`.
pub fn sobolev_norm<T: Scalar>(m: &dyn NFunction<T>, u: &GridFunction<T>, tol: T) -> Result<T> {
    Ok(luxemburg_norm(m, u, tol)? + gradient_norm(m, u, tol)?)
}

/// `(|∫ u v|, 2 ‖u‖_A ‖v‖_Ã)`.
pub fn holder_pairing<T: Scalar>(
    m: &Model<T>,
    u: &GridFunction<T>,
    v: &GridFunction<T>,
    tol: T,
) -> Result<(T, T)> {
    u.check_same_lattice(v)?;
    let mut sum = CompensatedSum::new();
    for (&a, &b) in u.values().iter().zip(v.values()) {
        sum.add(a * b);
    }
    let lhs = (sum.value() * u.cell_volume()).abs();
    if u.is_zero() || v.is_zero() {
        return Ok((lhs, T::zero()));
    }
    let conj = conjugate_model(m);
    let rhs = T::two() * luxemburg_norm(m.as_ref(), u, tol)? * luxemburg_norm(conj.as_ref(), v, tol)?;
    Ok((lhs, rhs))
}
