//! Adaptive Gauss–Kronrod quadrature and graded geometric panels for
//! integrands with a singular endpoint at zero or a slowly decaying tail.

use serde::Serialize;

use crate::error::Result;
use crate::scalar::Scalar;

/// Absolute plus relative accuracy request; the target is
/// `max(abs, rel * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance<T> {
    pub abs: T,
    pub rel: T,
}

impl<T: Scalar> Tolerance<T> {
    pub fn new(tol: T) -> Self {
        Self { abs: tol, rel: tol }
    }

    pub fn target(&self, value: T) -> T {
        self.abs.max(self.rel * value.abs())
    }

    fn scaled(&self, factor: T) -> Self {
        Self {
            abs: self.abs * factor,
            rel: self.rel * factor,
        }
    }
}

impl<T: Scalar> Default for Tolerance<T> {
    fn default() -> Self {
        Self::new(T::lit(1e-10).max(T::epsilon() * T::lit(64.0)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult<T> {
    pub value: T,
    pub abs_error_estimate: T,
    pub subdivisions: usize,
    pub converged: bool,
}

// 15-point Kronrod abscissae (non-negative half) with the embedded 7-point Gauss rule.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One G7/K15 panel: returns `(kronrod_value, error_estimate)`.
pub fn gauss_kronrod<T, F>(f: &mut F, a: T, b: T) -> Result<(T, T)>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let center = (a + b) * T::half();
    let half = (b - a) * T::half();
    let f_center = f(center)?;
    let mut res_k = f_center * T::lit(WGK[7]);
    let mut res_g = f_center * T::lit(WG[3]);
    let mut res_abs = res_k.abs();
    let mut values = [(T::zero(), T::zero()); 7];
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        values[j] = (f1, f2);
        res_k = res_k + T::lit(WGK[j]) * (f1 + f2);
        res_abs = res_abs + T::lit(WGK[j]) * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g = res_g + T::lit(WG[j / 2]) * (f1 + f2);
        }
    }
    let mean = res_k * T::half();
    let mut res_asc = T::lit(WGK[7]) * (f_center - mean).abs();
    for j in 0..7 {
        let (f1, f2) = values[j];
        res_asc = res_asc + T::lit(WGK[j]) * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let scale = half.abs();
    let value = res_k * half;
    res_abs = res_abs * scale;
    res_asc = res_asc * scale;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != T::zero() && err != T::zero() {
        let r = (T::lit(200.0) * err / res_asc).powf(T::lit(1.5));
        err = res_asc * r.min(T::one());
    }
    let floor = T::lit(50.0) * T::epsilon() * res_abs;
    if res_abs > T::min_positive_value() / (T::lit(50.0) * T::epsilon()) && floor > err {
        err = floor;
    }
    Ok((value, err))
}

/// Globally adaptive bisection on `[a, b]`, refining the panel with the
/// largest error estimate first.
pub fn adaptive<T, F>(
    f: &mut F,
    a: T,
    b: T,
    tol: Tolerance<T>,
    max_subdivisions: usize,
) -> Result<QuadratureResult<T>>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    if a == b {
        return Ok(QuadratureResult {
            value: T::zero(),
            abs_error_estimate: T::zero(),
            subdivisions: 0,
            converged: true,
        });
    }
    let (v, e) = gauss_kronrod(f, a, b)?;
    let mut panels = vec![(a, b, v, e)];
    let mut value = v;
    let mut error = e;
    let mut subdivisions = 1;
    while error > tol.target(value) && subdivisions < max_subdivisions {
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, p)| {
                if p.3 > acc.1 {
                    (i, p.3)
                } else {
                    acc
                }
            });
        let (lo, hi, pv, pe) = panels.swap_remove(worst);
        let mid = (lo + hi) * T::half();
        if mid <= lo || mid >= hi {
            // cannot split further in this precision
            panels.push((lo, hi, pv, pe));
            break;
        }
        let (v1, e1) = gauss_kronrod(f, lo, mid)?;
        let (v2, e2) = gauss_kronrod(f, mid, hi)?;
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
        subdivisions += 1;
        value = panels.iter().map(|p| p.2).sum();
        error = panels.iter().map(|p| p.3).sum();
    }
    Ok(QuadratureResult {
        value,
        abs_error_estimate: error,
        subdivisions,
        converged: error <= tol.target(value),
    })
}

/// Direction of a graded panel sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grading<T> {
    /// Panels `[b/2^(k+1), b/2^k]` toward a singular endpoint at zero, never
    /// going below `floor`.
    TowardZero { upper: T, floor: T },
    /// Panels `[a*2^k, a*2^(k+1)]` toward infinity, never beyond `ceiling`.
    TowardInfinity { lower: T, ceiling: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradedResult<T> {
    pub quadrature: QuadratureResult<T>,
    /// Local power-law exponent `beta` of the integrand (`f ~ r^beta`) at the
    /// far end of the sweep, estimated from consecutive panel ratios.
    pub exponent: Option<T>,
    /// The sweep stalled with non-decaying panels: the integral diverges.
    pub divergent: bool,
}

const MIN_PANELS: usize = 6;
const STALL_WINDOW: usize = 12;

/// Integrates over a geometric panel sweep, extrapolating the remaining
/// tail as a geometric series once consecutive panel ratios settle.
pub fn graded<T, F>(f: &mut F, grading: Grading<T>, tol: Tolerance<T>) -> Result<GradedResult<T>>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    let panel_tol = tol.scaled(T::lit(0.01));
    let two = T::two();
    let log2 = |v: T| v.ln() / two.ln();
    let mut sum = T::zero();
    let mut err_sum = T::zero();
    let mut subdivisions = 0;
    let mut prev: Option<T> = None;
    let mut prev_ratio: Option<T> = None;
    let mut ratios: Vec<T> = Vec::new();
    let mut last_tail = (T::zero(), T::infinity());
    let exponent_of = |ratio: T| match grading {
        Grading::TowardZero { .. } => -T::one() - log2(ratio),
        Grading::TowardInfinity { .. } => log2(ratio) - T::one(),
    };
    for k in 0..4096usize {
        let (lo, hi) = match grading {
            Grading::TowardZero { upper, floor } => {
                let hi = upper / two.powi(k as i32);
                let lo = hi / two;
                if lo < floor || lo <= T::zero() {
                    break;
                }
                (lo, hi)
            }
            Grading::TowardInfinity { lower, ceiling } => {
                let lo = lower * two.powi(k as i32);
                let hi = lo * two;
                if hi > ceiling || !hi.is_finite() {
                    break;
                }
                (lo, hi)
            }
        };
        let r = adaptive(f, lo, hi, panel_tol, 64)?;
        subdivisions += r.subdivisions;
        sum = sum + r.value;
        err_sum = err_sum + r.abs_error_estimate;
        let current = r.value;
        if let Some(p) = prev {
            if p == T::zero() && current == T::zero() {
                return Ok(GradedResult {
                    quadrature: QuadratureResult {
                        value: sum,
                        abs_error_estimate: err_sum,
                        subdivisions,
                        converged: err_sum <= tol.target(sum),
                    },
                    exponent: None,
                    divergent: false,
                });
            }
            if p != T::zero() {
                let ratio = current / p;
                ratios.push(ratio);
                if k >= MIN_PANELS && ratio > T::zero() && ratio < T::one() {
                    let tail = current * ratio / (T::one() - ratio);
                    let drift = prev_ratio.map_or(T::one(), |q| (ratio - q).abs())
                        + T::lit(1e3) * T::epsilon();
                    let tail_err =
                        T::lit(10.0) * current.abs() * drift / ((T::one() - ratio).powi(2));
                    last_tail = (tail, tail_err);
                    let total = sum + tail;
                    if err_sum + tail_err <= tol.target(total) {
                        return Ok(GradedResult {
                            quadrature: QuadratureResult {
                                value: total,
                                abs_error_estimate: err_sum + tail_err,
                                subdivisions,
                                converged: true,
                            },
                            exponent: Some(exponent_of(ratio)),
                            divergent: false,
                        });
                    }
                }
                prev_ratio = Some(ratio);
                if ratios.len() >= STALL_WINDOW
                    && ratios[ratios.len() - STALL_WINDOW..]
                        .iter()
                        .all(|&q| q >= T::one() - T::lit(1e-9))
                {
                    return Ok(GradedResult {
                        quadrature: QuadratureResult {
                            value: sum,
                            abs_error_estimate: T::infinity(),
                            subdivisions,
                            converged: false,
                        },
                        exponent: Some(exponent_of(ratio)),
                        divergent: true,
                    });
                }
            }
        }
        prev = Some(current);
    }
    // ran out of room before the tail settled
    let (tail, tail_err) = last_tail;
    let value = if tail_err.is_finite() { sum + tail } else { sum };
    let exponent = ratios.last().copied().filter(|&q| q > T::zero()).map(exponent_of);
    let divergent = ratios.last().is_some_and(|&q| q >= T::one());
    Ok(GradedResult {
        quadrature: QuadratureResult {
            value,
            abs_error_estimate: err_sum + tail_err,
            subdivisions,
            converged: false,
        },
        exponent,
        divergent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_exact_on_polynomials() {
        let mut f = |x: f64| Ok(x.powi(9) - 3.0 * x.powi(4) + 1.0);
        let (v, e) = gauss_kronrod(&mut f, 0.0, 2.0).unwrap();
        let exact = 2f64.powi(10) / 10.0 - 3.0 * 2f64.powi(5) / 5.0 + 2.0;
        assert!((v - exact).abs() < 1e-12);
        assert!(e < 1e-10);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let mut f = |x: f64| Ok((30.0 * x).sin());
        let r = adaptive(&mut f, 0.0, 3.0, Tolerance::new(1e-12), 200).unwrap();
        let exact = (1.0 - (90.0f64).cos()) / 30.0;
        assert!(r.converged);
        assert!((r.value - exact).abs() < 1e-11, "{} vs {exact}", r.value);
    }

    #[test]
    fn graded_integrates_endpoint_singularity() {
        // ∫₀¹ r^(-2/3) dr = 3
        let mut f = |r: f64| Ok(r.powf(-2.0 / 3.0));
        let g = graded(
            &mut f,
            Grading::TowardZero {
                upper: 1.0,
                floor: 1e-300,
            },
            Tolerance::new(1e-12),
        )
        .unwrap();
        assert!(g.quadrature.converged);
        assert!((g.quadrature.value - 3.0).abs() < 1e-11);
        assert!((g.exponent.unwrap() + 2.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn graded_integrates_power_tail() {
        // ∫₁^∞ τ^(-5/4) dτ = 4
        let mut f = |t: f64| Ok(t.powf(-1.25));
        let g = graded(
            &mut f,
            Grading::TowardInfinity {
                lower: 1.0,
                ceiling: 1e300,
            },
            Tolerance::new(1e-12),
        )
        .unwrap();
        assert!(g.quadrature.converged);
        assert!((g.quadrature.value - 4.0).abs() < 1e-10);
        assert!((g.exponent.unwrap() + 1.25).abs() < 1e-8);
    }

    #[test]
    fn graded_flags_log_divergence() {
        let mut f = |r: f64| Ok(1.0 / r);
        let g = graded(
            &mut f,
            Grading::TowardZero {
                upper: 1.0,
                floor: 1e-300,
            },
            Tolerance::new(1e-10),
        )
        .unwrap();
        assert!(g.divergent);
        assert!(!g.quadrature.converged);
        assert!((g.exponent.unwrap() + 1.0).abs() < 1e-8);
    }

    #[test]
    fn graded_flags_strong_singularity() {
        let mut f = |r: f64| Ok(r.powf(-1.25));
        let g = graded(
            &mut f,
            Grading::TowardZero {
                upper: 1.0,
                floor: 1e-300,
            },
            Tolerance::new(1e-10),
        )
        .unwrap();
        assert!(g.divergent);
    }
}
