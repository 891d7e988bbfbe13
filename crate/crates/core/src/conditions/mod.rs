//! Grid-scan certification of structural conditions on a model: `Δ₂`
//! (global and near infinity), integrability of the Sobolev integrand at
//! zero, the gradient growth bounds `|∇ₓF| <= C F^{1+δ}` for `F = A, A_*, Ã`,
//! the `≪` relation between two models, and the pointwise inequalities
//! linking `A`, `a`, their inverses and the Young inequality.
//!
//! "Passed" means no counterexample on the declared grid and stable trends
//! on the boundary decades; every report embeds its grid description.

mod delta2;
mod growth;
mod much_less;
mod young;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::calculus::p3_fit;
use crate::error::Result;
use crate::nfunction::NFunction;

pub use delta2::check_delta2;
pub use growth::{check_p5, check_p5_star, check_p5_tilde, delta_candidates};
pub use much_less::check_much_less_than;
pub use young::verify_young_relations;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionId {
    Delta2,
    #[serde(rename = "Delta2-near-infinity")]
    Delta2NearInfinity,
    P3,
    P5,
    #[serde(rename = "P5-star")]
    P5Star,
    #[serde(rename = "P5-tilde")]
    P5Tilde,
    MuchLessThan,
    /// `A <= a t <= A(2t)`, `y < A^{-1}(y) Ã^{-1}(y) <= 2y` and Young.
    #[serde(rename = "A-a-Young")]
    AaYoung,
}

impl ConditionId {
    pub fn as_str(self) -> &'static str {
        match self {
            ConditionId::Delta2 => "Delta2",
            ConditionId::Delta2NearInfinity => "Delta2-near-infinity",
            ConditionId::P3 => "P3",
            ConditionId::P5 => "P5",
            ConditionId::P5Star => "P5-star",
            ConditionId::P5Tilde => "P5-tilde",
            ConditionId::MuchLessThan => "MuchLessThan",
            ConditionId::AaYoung => "A-a-Young",
        }
    }
}

/// A grid point with the two sides of the checked inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: ConditionId,
    pub passed: bool,
    pub constants: BTreeMap<String, f64>,
    pub witnesses: Vec<Witness>,
    pub grid: String,
    pub notes: Vec<String>,
}

impl ConditionReport {
    fn new(condition: ConditionId, grid: String) -> Self {
        Self {
            condition,
            passed: false,
            constants: BTreeMap::new(),
            witnesses: Vec::new(),
            grid,
            notes: Vec::new(),
        }
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.get(name).copied()
    }

    fn set(&mut self, name: &str, v: f64) {
        self.constants.insert(name.to_string(), v);
    }
}

/// `10^{k/per_decade}` from `lo` to `hi` inclusive (both powers of ten).
pub(crate) fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let pd = per_decade as f64;
    let a = (lo.log10() * pd).round() as i64;
    let b = (hi.log10() * pd).round() as i64;
    (a..=b).map(|k| 10f64.powf(k as f64 / pd)).collect()
}

/// Largest value among grid entries with `t` in the top decade, and in the decade below.
pub(crate) fn decade_maxima(ts: &[f64], values: &[f64]) -> (f64, f64) {
    let hi = ts.last().copied().unwrap_or(1.0);
    let mut top = 0.0f64;
    let mut prev = 0.0f64;
    for (&t, &v) in ts.iter().zip(values) {
        if t > hi / 10.0 * (1.0 + 1e-12) {
            top = top.max(v);
        } else if t > hi / 100.0 * (1.0 + 1e-12) {
            prev = prev.max(v);
        }
    }
    (top, prev)
}

/// Allowed growth of a maximum from one decade to the next.
pub const TREND_SLACK: f64 = 1.01;

/// Bounded trend: the top decade does not exceed the previous one.
pub(crate) fn trend_stable(top: f64, prev: f64) -> bool {
    top.is_finite() && top <= prev * TREND_SLACK
}

/// Integrability of `A^{-1}(x, τ) τ^{-(n+1)/n}` at zero, by exponent fit.
pub fn check_p3(m: &dyn NFunction<f64>, x: &[f64]) -> Result<ConditionReport> {
    let fit = p3_fit(m, x)?;
    let mut r = ConditionReport::new(
        ConditionId::P3,
        "21 log-spaced tau in [1e-12, 1e-2]; partial integrals over [1e-12, 1e-8] and [1e-8, 1e-4]"
            .to_string(),
    );
    r.passed = fit.passed;
    r.set("beta", fit.exponent);
    r.set("cauchy_ratio", fit.cauchy_ratio);
    r.witnesses.push(Witness {
        x: x.to_vec(),
        t: 1e-12,
        lhs: fit.exponent,
        rhs: -1.0 + crate::calculus::P3_MARGIN,
    });
    if !fit.passed {
        r.notes.push(format!(
            "integrand exponent {:.6} at zero is not above -1: the Sobolev conjugate is undefined here",
            fit.exponent
        ));
    }
    Ok(r)
}

/// `check_p3` at every point, all passing.
pub fn p3_holds_everywhere(m: &dyn NFunction<f64>, xs: &[Vec<f64>]) -> Result<bool> {
    for x in xs {
        if !p3_fit(m, x)?.passed {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests;
