//! Gamma function for real positive arguments.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;

// g = 7, n = 9 coefficients (as used by the GNU Scientific Library).
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for `x > 0`.
///
/// Lanczos approximation with the reflection formula below 1/2. Relative
/// error stays under 1e-12 on (0, 50].
pub fn gamma_real(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("gamma_real requires x > 0, got {x}")));
    }
    Ok(gamma_unchecked(x))
}

pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    // Exact on small integers; avoids Lanczos round-off where tests expect factorials.
    if x == x.trunc() && x <= 21.0 {
        return (2..x as u64).fold(1.0, |acc, k| acc * k as f64);
    }
    let z = x - 1.0;
    let mut sum = LANCZOS_COEFFS[0];
    for (k, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        sum += c / (z + k as f64);
    }
    let w = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * w.powf(z + 0.5) * (-w).exp() * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn integer_values_are_factorials() {
        assert_eq!(gamma_real(1.0).unwrap(), 1.0);
        assert_eq!(gamma_real(4.0).unwrap(), 6.0);
        let mut fact = 1.0_f64;
        for n in 1..50u32 {
            // fact = (n-1)!
            let g = gamma_real(n as f64).unwrap();
            assert!(rel_err(g, fact) < 1e-12, "n={n} g={g} fact={fact}");
            fact *= n as f64;
        }
    }

    #[test]
    fn half_integers_match_sqrt_pi_products() {
        // Γ(n + 1/2) = (n - 1/2)(n - 3/2)...(1/2)·√π
        let mut expected = PI.sqrt();
        for n in 0..49u32 {
            let x = n as f64 + 0.5;
            let g = gamma_real(x).unwrap();
            assert!(rel_err(g, expected) < 1e-12, "x={x} g={g} expected={expected}");
            expected *= x;
        }
        let g35 = gamma_real(3.5).unwrap();
        assert!(rel_err(g35, 2.5 * 1.5 * 0.5 * PI.sqrt()) < 1e-14);
        assert!((g35 - 3.323_350_970_447_842_6).abs() < 1e-12);
    }

    #[test]
    fn small_arguments_use_reflection() {
        // Γ(x) Γ(1-x) = π / sin(πx)
        for &x in &[1e-6, 0.01, 0.1, 0.25, 0.4, 0.49] {
            let lhs = gamma_real(x).unwrap() * gamma_real(1.0 - x).unwrap();
            assert!(rel_err(lhs, PI / (PI * x).sin()) < 1e-13);
        }
    }

    #[test]
    fn recurrence_holds_on_a_dense_grid() {
        // Γ(x+1) = x Γ(x)
        let mut x = 0.05;
        while x < 49.0 {
            let lhs = gamma_real(x + 1.0).unwrap();
            let rhs = x * gamma_real(x).unwrap();
            assert!(rel_err(lhs, rhs) < 1e-12, "x={x}");
            x += 0.173;
        }
    }

    #[test]
    fn rejects_non_positive_input() {
        assert!(gamma_real(0.0).is_err());
        assert!(gamma_real(-1.5).is_err());
        assert!(gamma_real(f64::NAN).is_err());
    }
}
