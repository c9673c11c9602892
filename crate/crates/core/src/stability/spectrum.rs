use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::hnn::Matrix3;

/// |ι| at or below this is reported as marginal.
const MARGINAL_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectrum {
    /// Real roots first, then complex pairs with the positive imaginary part
    /// leading.
    pub eigenvalues: [Complex64; 3],
    /// Principal arguments in `[-π, π)`.
    pub arguments: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Marginal => "marginal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub order: f64,
    pub alpha_min: f64,
    /// `ι = q - 2|α_min|/π`.
    pub iota: f64,
    /// `q* = 2|α_min|/π`; the equilibrium is stable for `q < q*`.
    pub critical_order: f64,
    pub verdict: Verdict,
}

fn principal_argument(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    if a >= PI {
        -PI
    } else {
        a
    }
}

fn eval_monic(c: &[f64; 3], z: Complex64) -> (Complex64, Complex64) {
    // p(z) = z^3 + c2 z^2 + c1 z + c0, returns (p, p')
    let p = ((z + c[2]) * z + c[1]) * z + c[0];
    let dp = (3.0 * z + 2.0 * c[2]) * z + c[1];
    (p, dp)
}

fn polish(c: &[f64; 3], mut z: Complex64) -> Complex64 {
    for _ in 0..4 {
        let (p, dp) = eval_monic(c, z);
        if dp.norm() == 0.0 {
            break;
        }
        let next = z - p / dp;
        if !(next.re.is_finite() && next.im.is_finite()) {
            break;
        }
        if eval_monic(c, next).0.norm() >= p.norm() {
            break;
        }
        z = next;
    }
    z
}

/// A real root of the monic cubic via the trigonometric / Cardano forms.
fn real_root(c: &[f64; 3]) -> f64 {
    let (a, b, d) = (c[2], c[1], c[0]);
    // Depressed cubic t^3 + p t + r with z = t - a/3.
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let r = 2.0 * a * a * a / 27.0 - a * b / 3.0 + d;
    let disc = (r / 2.0).powi(2) + (p / 3.0).powi(3);
    let t = if p == 0.0 && r == 0.0 {
        0.0
    } else if disc <= 0.0 && p < 0.0 {
        // Three real roots; take the largest.
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * r / (p * m)).clamp(-1.0, 1.0);
        m * (arg.acos() / 3.0).cos()
    } else {
        let sq = disc.max(0.0).sqrt();
        // Cancellation-free pairing of the two cube roots.
        let u = (-r / 2.0 - r.signum() * sq).cbrt();
        if u == 0.0 {
            (-r).cbrt()
        } else {
            u - p / (3.0 * u)
        }
    };
    t - shift
}

/// Eigenvalues of a real 3×3 matrix from its characteristic cubic.
///
/// One real root is taken in closed form and Newton-polished, the remaining
/// quadratic factor is solved directly, and every root is polished once more
/// against the full cubic. Complex roots come out as exact conjugates.
pub fn eigenvalues_3x3(m: &Matrix3) -> Spectrum {
    let trace = m[0][0] + m[1][1] + m[2][2];
    let minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] - m[0][2] * m[2][0]
        + m[1][1] * m[2][2]
        - m[1][2] * m[2][1];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let c = [-det, minors, -trace];

    let r0 = polish(&c, Complex64::new(real_root(&c), 0.0)).re;
    // z^3 + c2 z^2 + c1 z + c0 = (z - r0)(z^2 + b z + k)
    let b = c[2] + r0;
    let k = c[1] + r0 * b;
    let disc = b * b - 4.0 * k;
    let mut eig = if disc >= 0.0 {
        let s = disc.sqrt();
        let q = -0.5 * (b + b.signum() * s);
        let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q, k / q) };
        let r1 = polish(&c, Complex64::new(r1, 0.0)).re;
        let r2 = polish(&c, Complex64::new(r2, 0.0)).re;
        [r0, r1, r2].map(|v| Complex64::new(v, 0.0))
    } else {
        let z = polish(&c, Complex64::new(-b / 2.0, (-disc).sqrt() / 2.0));
        let z = Complex64::new(z.re, z.im.abs());
        [Complex64::new(r0, 0.0), z, z.conj()]
    };
    if eig[2].im == 0.0 && eig[1].im == 0.0 {
        eig.sort_by(|x, y| y.re.total_cmp(&x.re));
    }
    Spectrum {
        eigenvalues: eig,
        arguments: eig.map(principal_argument),
    }
}

/// Sector criterion: with `α_min` the argument of least magnitude,
/// `ι = q - 2|α_min|/π`; the equilibrium is unstable iff `ι > 0`.
pub fn stability_index(spectrum: &Spectrum, q: f64) -> StabilityReport {
    let alpha_min = spectrum
        .arguments
        .iter()
        .copied()
        .min_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(0.0);
    let critical_order = 2.0 * alpha_min.abs() / PI;
    let iota = q - critical_order;
    let verdict = if iota.abs() <= MARGINAL_BAND {
        Verdict::Marginal
    } else if iota > 0.0 {
        Verdict::Unstable
    } else {
        Verdict::Stable
    };
    StabilityReport {
        order: q,
        alpha_min,
        iota,
        critical_order,
        verdict,
    }
}
