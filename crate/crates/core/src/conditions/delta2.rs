use super::{decade_maxima, log_grid, trend_stable, ConditionId, ConditionReport, Witness};
use crate::error::Result;
use crate::nfunction::{NFunction, NFunctionExt};

const LATTICE: usize = 9;
const PER_DECADE: usize = 8;
const T_MAX: f64 = 1e6;
const THRESHOLDS: [f64; 3] = [1.0, 10.0, 100.0];

struct Scan {
    ts: Vec<f64>,
    /// Max over the lattice of `A(x, 2t)/A(x, t)` for each `t`.
    maxima: Vec<f64>,
    worst: Witness,
    k: f64,
}

fn value_or_infinity(m: &dyn NFunction<f64>, x: &[f64], t: f64) -> Result<f64> {
    match m.eval(x, t) {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Ok(f64::INFINITY),
        Err(e) if e.is_overflow() => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

fn scan(m: &dyn NFunction<f64>, t_lo: f64) -> Result<Scan> {
    let ts = log_grid(t_lo, T_MAX, PER_DECADE);
    let lattice = m.domain().closed_lattice(LATTICE);
    let mut maxima = vec![0.0f64; ts.len()];
    let mut k = 0.0f64;
    let mut worst = Witness {
        x: lattice[0].clone(),
        t: ts[0],
        lhs: 0.0,
        rhs: 0.0,
    };
    for x in &lattice {
        for (i, &t) in ts.iter().enumerate() {
            let base = value_or_infinity(m, x, t)?;
            let doubled = value_or_infinity(m, x, 2.0 * t)?;
            let ratio = if base.is_finite() { doubled / base } else { f64::INFINITY };
            let ratio = if ratio.is_nan() { f64::INFINITY } else { ratio };
            maxima[i] = maxima[i].max(ratio);
            if ratio > k {
                k = ratio;
                worst = Witness {
                    x: x.clone(),
                    t,
                    lhs: doubled,
                    rhs: base,
                };
            }
        }
    }
    // rhs of the witness is K·A(x, t), tight at the worst point
    worst.rhs *= k;
    Ok(Scan {
        ts,
        maxima,
        worst,
        k,
    })
}

fn grid_description(m: &dyn NFunction<f64>, t_lo: f64) -> String {
    format!(
        "closed lattice {LATTICE}^{} points; t log-spaced in [{t_lo:e}, {T_MAX:e}], {PER_DECADE} per decade",
        m.domain().dim()
    )
}

/// `A(x, 2t) <= K A(x, t)` over a lattice of `Ω̄` and `t ∈ [1e-4, 1e6]`, or
/// for `t >= t₀` with the smallest passing `t₀ ∈ {1, 10, 100}`.
///
/// Passes when `K` is finite and the per-decade maximum of the ratio does
/// not grow over the top two decades. Overflow counts as an infinite ratio.
pub fn check_delta2(m: &dyn NFunction<f64>, near_infinity: bool) -> Result<ConditionReport> {
    if !near_infinity {
        let s = scan(m, 1e-4)?;
        let mut r = ConditionReport::new(ConditionId::Delta2, grid_description(m, 1e-4));
        let (top, prev) = decade_maxima(&s.ts, &s.maxima);
        r.passed = s.k.is_finite() && trend_stable(top, prev);
        r.set("K", s.k);
        r.witnesses.push(s.worst);
        if !r.passed {
            r.notes
                .push(format!("ratio grows across the top decades: {prev:e} then {top:e}"));
        }
        return Ok(r);
    }
    let mut last = None;
    for &t0 in &THRESHOLDS {
        let s = scan(m, t0)?;
        let (top, prev) = decade_maxima(&s.ts, &s.maxima);
        let passed = s.k.is_finite() && trend_stable(top, prev);
        let mut r = ConditionReport::new(ConditionId::Delta2NearInfinity, grid_description(m, t0));
        r.passed = passed;
        r.set("K", s.k);
        r.set("t0", t0);
        r.witnesses.push(s.worst);
        if passed {
            return Ok(r);
        }
        r.notes.push(format!(
            "no threshold in {THRESHOLDS:?} gives a bounded ratio; top decades: {prev:e} then {top:e}"
        ));
        last = Some(r);
    }
    Ok(last.expect("at least one threshold"))
}
