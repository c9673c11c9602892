//! Quadrature weights of the fractional Adams-Bashforth-Moulton scheme.
//!
//! The predictor is the product rectangle rule, the corrector the product
//! trapezoidal rule. Both weight families depend on `i - j` only (apart from
//! the first corrector weight), so a full run precomputes them once per lag.
//!
//! Differences of large powers are evaluated through `expm1`/`ln_1p` to avoid
//! the cancellation that the textbook form suffers for lags around 1e5.

use crate::error::{Error, Result};
use crate::gamma::gamma_unchecked;

/// `(m + 1)^p - m^p` without catastrophic cancellation.
fn forward_power_diff(m: f64, p: f64) -> f64 {
    if m == 0.0 {
        1.0
    } else {
        m.powf(p) * (p * (1.0 / m).ln_1p()).exp_m1()
    }
}

/// `(m + 2)^p + m^p - 2 (m + 1)^p`.
fn second_power_diff(m: f64, p: f64) -> f64 {
    forward_power_diff(m + 1.0, p) - forward_power_diff(m, p)
}

/// `i^(q+1) - (i - q)(i + 1)^q`, rearranged as `i^q [q(1 + g) - i g]`
/// with `g = (1 + 1/i)^q - 1`.
fn first_corrector_weight(i: f64, q: f64) -> f64 {
    if i == 0.0 {
        return q;
    }
    let g = (q * (1.0 / i).ln_1p()).exp_m1();
    i.powf(q) * (q * (1.0 + g) - i * g)
}

fn check_order(q: f64) -> Result<()> {
    if q > 0.0 && q <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("order q must lie in (0, 1], got {q}")))
    }
}

/// Predictor weight `b_{j,i+1} = (h^q / q) ((i + 1 - j)^q - (i - j)^q)`.
pub fn predictor_weight_b(j: usize, i: usize, q: f64, h: f64) -> Result<f64> {
    if j > i {
        return Err(Error::Index { j, bound: i });
    }
    check_order(q)?;
    if !(h > 0.0) {
        return Err(Error::domain(format!("step size must be positive, got {h}")));
    }
    Ok(h.powf(q) / q * forward_power_diff((i - j) as f64, q))
}

/// Corrector weight `a_{j,i+1}` for `0 <= j <= i + 1`.
///
/// `a_{i+1,i+1} = 1` exactly; `a_{0,i+1} = i^(q+1) - (i - q)(i + 1)^q`.
pub fn corrector_weight_a(j: usize, i: usize, q: f64) -> Result<f64> {
    if j > i + 1 {
        return Err(Error::Index { j, bound: i + 1 });
    }
    check_order(q)?;
    Ok(if j == i + 1 {
        1.0
    } else if j == 0 {
        first_corrector_weight(i as f64, q)
    } else {
        second_power_diff((i - j) as f64, q + 1.0)
    })
}

/// Weight tables for a run of `steps` steps, pre-scaled by the Gamma factors
/// and laid out in reverse lag order so that step `i` reads a contiguous
/// slice aligned with the history `f_0..=f_i`.
#[derive(Debug, Clone)]
pub(crate) struct WeightTable {
    steps: usize,
    /// `b(lag) / Γ(q)` stored at index `steps - 1 - lag`.
    predictor_rev: Vec<f64>,
    /// `h^q / Γ(q+2) · a(lag)` stored at index `steps - 1 - lag`.
    corrector_rev: Vec<f64>,
    /// `h^q / Γ(q+2) · a_{0,i+1}` indexed by `i`.
    corrector_first: Vec<f64>,
    /// `h^q / Γ(q+2)`, the weight of the freshly predicted value.
    corrector_scale: f64,
}

impl WeightTable {
    pub(crate) fn new(q: f64, h: f64, steps: usize) -> Self {
        let hq = h.powf(q);
        let pred_scale = hq / (q * gamma_unchecked(q));
        let corr_scale = hq / gamma_unchecked(q + 2.0);
        let mut predictor_rev = vec![0.0; steps];
        let mut corrector_rev = vec![0.0; steps];
        for lag in 0..steps {
            let m = lag as f64;
            predictor_rev[steps - 1 - lag] = pred_scale * forward_power_diff(m, q);
            corrector_rev[steps - 1 - lag] = corr_scale * second_power_diff(m, q + 1.0);
        }
        let corrector_first = (0..steps)
            .map(|i| corr_scale * first_corrector_weight(i as f64, q))
            .collect();
        Self {
            steps,
            predictor_rev,
            corrector_rev,
            corrector_first,
            corrector_scale: corr_scale,
        }
    }

    /// Predictor weights for step `i`, aligned with `f_0..=f_i`.
    #[inline]
    pub(crate) fn predictor(&self, i: usize) -> &[f64] {
        &self.predictor_rev[self.steps - 1 - i..]
    }

    /// Corrector lag weights for step `i`, aligned with `f_0..=f_i`.
    /// Entry 0 is not meaningful; use [`Self::corrector_first`] for `f_0`.
    #[inline]
    pub(crate) fn corrector(&self, i: usize) -> &[f64] {
        &self.corrector_rev[self.steps - 1 - i..]
    }

    #[inline]
    pub(crate) fn corrector_first(&self, i: usize) -> f64 {
        self.corrector_first[i]
    }

    #[inline]
    pub(crate) fn corrector_scale(&self) -> f64 {
        self.corrector_scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predictor_reduces_to_rectangle_rule_at_unit_order() {
        for i in 0..40 {
            for j in 0..=i {
                let b = predictor_weight_b(j, i, 1.0, 0.1).unwrap();
                assert!((b - 0.1).abs() < 1e-15, "j={j} i={i} b={b}");
            }
        }
    }

    #[test]
    fn predictor_examples() {
        for i in [0, 3, 17] {
            assert!((predictor_weight_b(i, i, 0.5, 1.0).unwrap() - 2.0).abs() < 1e-15);
        }
        let b = predictor_weight_b(0, 3, 0.5, 0.01).unwrap();
        let direct = (0.01_f64.sqrt() / 0.5) * (2.0 - 3.0_f64.sqrt());
        assert!((b - direct).abs() < 1e-16);
        assert!((b - 0.053_589_838_486_224_5).abs() < 1e-15);
    }

    #[test]
    fn corrector_examples() {
        for i in [0, 1, 5, 1000] {
            for q in [0.1, 0.5, 0.99975, 1.0] {
                assert_eq!(corrector_weight_a(i + 1, i, q).unwrap(), 1.0);
            }
        }
        for i in 1..50 {
            for j in 1..=i {
                let a = corrector_weight_a(j, i, 1.0).unwrap();
                assert!((a - 2.0).abs() < 1e-12, "j={j} i={i} a={a}");
            }
            assert!((corrector_weight_a(0, i, 1.0).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((corrector_weight_a(0, 1, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stable_forms_match_textbook_forms_for_small_lags() {
        for &q in &[0.2, 0.5, 0.9, 0.99975] {
            for i in 0..30usize {
                for j in 0..=i {
                    let m = (i - j) as f64;
                    let b_txt = 0.01_f64.powf(q) / q * ((m + 1.0).powf(q) - m.powf(q));
                    let b = predictor_weight_b(j, i, q, 0.01).unwrap();
                    assert!((b - b_txt).abs() <= 1e-13 * b_txt.abs().max(1.0));
                    if j >= 1 {
                        let p = q + 1.0;
                        let a_txt = (m + 2.0).powf(p) + m.powf(p) - 2.0 * (m + 1.0).powf(p);
                        let a = corrector_weight_a(j, i, q).unwrap();
                        assert!((a - a_txt).abs() < 1e-11, "q={q} i={i} j={j}");
                    }
                }
                let n = i as f64;
                let a0_txt = n.powf(q + 1.0) - (n - q) * (n + 1.0).powf(q);
                let a0 = corrector_weight_a(0, i, q).unwrap();
                assert!((a0 - a0_txt).abs() < 1e-11, "q={q} i={i}");
            }
        }
    }

    #[test]
    fn index_errors() {
        assert!(matches!(
            predictor_weight_b(4, 3, 0.5, 0.1),
            Err(Error::Index { j: 4, bound: 3 })
        ));
        assert!(matches!(
            corrector_weight_a(5, 3, 0.5),
            Err(Error::Index { j: 5, bound: 4 })
        ));
        assert!(predictor_weight_b(0, 3, 1.5, 0.1).is_err());
        assert!(predictor_weight_b(0, 3, 0.5, 0.0).is_err());
    }

    #[test]
    fn table_matches_pointwise_weights() {
        let (q, h, steps) = (0.7, 0.05, 64);
        let table = WeightTable::new(q, h, steps);
        let gq = gamma_unchecked(q);
        let scale = h.powf(q) / gamma_unchecked(q + 2.0);
        for i in [0, 1, 10, 63] {
            let pred = table.predictor(i);
            let corr = table.corrector(i);
            assert_eq!(pred.len(), i + 1);
            for j in 0..=i {
                let b = predictor_weight_b(j, i, q, h).unwrap() / gq;
                assert!((pred[j] - b).abs() < 1e-15);
                if j >= 1 {
                    let a = scale * corrector_weight_a(j, i, q).unwrap();
                    assert!((corr[j] - a).abs() < 1e-15);
                }
            }
            let a0 = scale * corrector_weight_a(0, i, q).unwrap();
            assert!((table.corrector_first(i) - a0).abs() < 1e-15);
        }
    }

    proptest::proptest! {
        #[test]
        fn predictor_weights_are_positive(q in 1e-3f64..=1.0, h in 1e-4f64..1.0, i in 0usize..100_000, frac in 0.0f64..=1.0) {
            let j = ((i as f64) * frac) as usize;
            proptest::prop_assert!(predictor_weight_b(j, i, q, h).unwrap() > 0.0);
        }
    }
}
