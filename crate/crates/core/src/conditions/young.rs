use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ConditionId, ConditionReport, Witness};
use crate::error::Result;
use crate::nfunction::{NFunction, NFunctionExt};

/// Relative slack of the three inequalities.
pub const SLACK: f64 = 1e-8;
/// Relative tolerance of Young's equality at `s = a(x, t)`.
pub const EQUALITY_TOL: f64 = 1e-7;

const LOG_RANGE: (f64, f64) = (-3.0, 3.0);

#[derive(Default)]
struct Worst {
    /// Largest relative violation (positive means violated).
    margin: f64,
    witness: Option<Witness>,
}

impl Worst {
    fn update(&mut self, margin: f64, w: impl FnOnce() -> Witness) {
        if self.witness.is_none() || margin > self.margin {
            self.margin = margin;
            self.witness = Some(w());
        }
    }
}

fn rel(excess: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        excess / scale
    } else {
        excess
    }
}

/// Samples `(x, t, s)` with `x` uniform in `Ω̄` and `t, s` log-uniform in
/// `[1e-3, 1e3]` (the first sample has `t = s = 0`) and checks
///
/// * `A(x, t) <= a(x, t) t <= A(x, 2t)`,
/// * `y < A^{-1}(x, y) Ã^{-1}(x, y) <= 2y` with `y = t`,
/// * `s t <= A(x, t) + Ã(x, s)`, with equality at `s = a(x, t)`.
///
/// Inequalities carry relative slack `1e-8`, the equality `1e-7`.
pub fn verify_young_relations(
    m: &dyn NFunction<f64>,
    samples: usize,
    seed: u64,
) -> Result<ConditionReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain = m.domain();
    let mut r = ConditionReport::new(
        ConditionId::AaYoung,
        format!(
            "{samples} samples, seed {seed}; x uniform in the closed box; t, s log-uniform in [1e-3, 1e3]"
        ),
    );
    let mut derivative = Worst::default();
    let mut inverse = Worst::default();
    let mut young = Worst::default();
    let mut equality = Worst::default();
    for i in 0..samples {
        let x: Vec<f64> = (0..domain.dim())
            .map(|j| rng.random_range(domain.lower()[j]..=domain.upper()[j]))
            .collect();
        let (t, s) = if i == 0 {
            (0.0, 0.0)
        } else {
            (
                10f64.powf(rng.random_range(LOG_RANGE.0..LOG_RANGE.1)),
                10f64.powf(rng.random_range(LOG_RANGE.0..LOG_RANGE.1)),
            )
        };
        let sec = m.section_at(&x)?;
        let at = sec.value(t)?;
        let slope = crate::nfunction::SectionExt::derivative(sec.as_ref(), t)?;
        let at2 = sec.value(2.0 * t)?;
        let mid = slope * t;
        let m1 = rel(at - mid, mid).max(rel(mid - at2, at2));
        derivative.update(m1, || Witness {
            x: x.clone(),
            t,
            lhs: mid,
            rhs: if at - mid > mid - at2 { at } else { at2 },
        });

        let y = t;
        let inv = crate::nfunction::SectionExt::inverse(sec.as_ref(), y)?;
        let inv_conj = crate::nfunction::SectionExt::inverse_conjugate(sec.as_ref(), y)?;
        let product = inv * inv_conj;
        // at y = 0 the strict lower bound degenerates to 0 = 0
        let lower = if y > 0.0 { rel(y - product, y) } else { 0.0 };
        let m2 = lower.max(rel(product - 2.0 * y, 2.0 * y));
        inverse.update(m2, || Witness {
            x: x.clone(),
            t: y,
            lhs: product,
            rhs: 2.0 * y,
        });

        let conj = crate::nfunction::SectionExt::conjugate(sec.as_ref(), s)?;
        let st = s * t;
        let m3 = rel(st - at - conj, at + conj);
        young.update(m3, || Witness {
            x: x.clone(),
            t,
            lhs: st,
            rhs: at + conj,
        });

        let conj_at_slope = crate::nfunction::SectionExt::conjugate(sec.as_ref(), slope)?;
        let total = at + conj_at_slope;
        let m4 = rel((total - mid).abs(), mid);
        equality.update(m4, || Witness {
            x: x.clone(),
            t,
            lhs: mid,
            rhs: total,
        });
    }
    r.set("worst_A_a_margin", derivative.margin);
    r.set("worst_inverse_margin", inverse.margin);
    r.set("worst_young_margin", young.margin);
    r.set("worst_equality_gap", equality.margin);
    r.set("samples", samples as f64);
    let checks = [
        ("A <= a t <= A(2t)", &derivative, SLACK),
        ("y < inverse product <= 2y", &inverse, SLACK),
        ("Young inequality", &young, SLACK),
        ("Young equality at s = a(t)", &equality, EQUALITY_TOL),
    ];
    r.passed = true;
    for (name, worst, tol) in checks {
        if worst.margin > tol {
            r.passed = false;
            r.notes
                .push(format!("{name} violated: relative margin {:e}", worst.margin));
        }
        if let Some(w) = &worst.witness {
            r.witnesses.push(w.clone());
        }
    }
    Ok(r)
}
