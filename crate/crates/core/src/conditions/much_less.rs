use super::{log_grid, ConditionId, ConditionReport, Witness};
use crate::error::{Error, Result};
use crate::nfunction::{NFunction, NFunctionExt};

const LATTICE: usize = 5;
const T_LO: f64 = 1e1;
const T_HI: f64 = 1e7;
const THRESHOLD: f64 = 1e-3;

fn value_or_infinity(m: &dyn NFunction<f64>, x: &[f64], t: f64) -> Result<f64> {
    match m.eval(x, t) {
        Ok(v) => Ok(v),
        Err(e) if e.is_overflow() => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// `A ≪ B`: for each `k`, `max_x A(x, kt)/B(x, t)` decreases over
/// `t ∈ {1e1, …, 1e7}` and ends below `1e-3`.
pub fn check_much_less_than(
    a: &dyn NFunction<f64>,
    b: &dyn NFunction<f64>,
    k_list: &[f64],
) -> Result<ConditionReport> {
    if a.domain() != b.domain() {
        return Err(Error::InvalidParameter(
            "the two models live on different domains".to_string(),
        ));
    }
    if k_list.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "k values must be positive, got {k_list:?}"
        )));
    }
    let ts = log_grid(T_LO, T_HI, 1);
    let lattice = a.domain().closed_lattice(LATTICE);
    let mut r = ConditionReport::new(
        ConditionId::MuchLessThan,
        format!(
            "closed lattice {LATTICE}^{} points; t in {{1e1, ..., 1e7}}; k in {k_list:?}",
            a.domain().dim()
        ),
    );
    r.passed = true;
    let mut worst_top = 0.0f64;
    for &k in k_list {
        let mut maxima = Vec::with_capacity(ts.len());
        let mut top_witness = None;
        for &t in &ts {
            let mut max = 0.0f64;
            for x in &lattice {
                let num = value_or_infinity(a, x, k * t)?;
                let den = value_or_infinity(b, x, t)?;
                let ratio = match (num.is_finite(), den.is_finite()) {
                    (_, false) if num.is_finite() => 0.0,
                    (false, _) | (_, false) => f64::INFINITY,
                    _ => num / den,
                };
                if ratio >= max {
                    max = ratio;
                    top_witness = Some(Witness {
                        x: x.clone(),
                        t,
                        lhs: num,
                        rhs: THRESHOLD * den,
                    });
                }
            }
            maxima.push(max);
        }
        let decreasing = maxima.windows(2).all(|w| w[1] <= w[0]);
        let top = *maxima.last().expect("nonempty grid");
        let ok = decreasing && top < THRESHOLD;
        r.set(&format!("ratio_top[k={k}]"), top);
        worst_top = worst_top.max(top);
        if !ok {
            r.passed = false;
            r.notes.push(format!(
                "k = {k}: per-t maxima {maxima:?} {}",
                if decreasing { "stay above the threshold" } else { "do not decrease" }
            ));
            if let Some(w) = top_witness {
                r.witnesses.push(w);
            }
        }
    }
    r.set("ratio_top", worst_top);
    Ok(r)
}
