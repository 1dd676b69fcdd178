//! Complex helpers that stay accurate near the origin.
//!
//! Characteristic functions of standardized laws satisfy φ(ξ) = 1 − ξ²/2 + O(ξ³), so
//! the metric ratios |φ_a − φ_b|/|ξ|^s are differences of numbers close to one. Every
//! evaluation therefore works with the cumulant function K = log φ and ψ = φ − 1,
//! computed without forming 1 + small.

use num_complex::Complex64;

const SERIES_CUTOFF: f64 = 0.1;

/// `exp(z) - 1` without cancellation for small `z`.
pub fn expm1(z: Complex64) -> Complex64 {
    if z.re == f64::NEG_INFINITY {
        return Complex64::new(-1.0, 0.0);
    }
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    let re = z.re.exp_m1() * c - 2.0 * half * half;
    let im = z.re.exp() * s;
    Complex64::new(re, im)
}

/// `ln(1 + z)` on the principal branch, accurate for small `z`.
pub fn ln_1p(z: Complex64) -> Complex64 {
    if z.norm_sqr() > 0.25 {
        return (1.0 + z).ln();
    }
    let modulus_term = 2.0 * z.re + z.norm_sqr();
    let re = 0.5 * modulus_term.ln_1p();
    let im = z.im.atan2(1.0 + z.re);
    Complex64::new(re, im)
}

/// `ln(1 + u) - u` for real `u > -1`.
pub fn ln_1p_minus_id(u: f64) -> f64 {
    if u.abs() < SERIES_CUTOFF {
        // -u²/2 + u³/3 - ...
        let mut term = -u * u;
        let mut sum = 0.0;
        for k in 2..40 {
            sum += term / k as f64;
            term *= -u;
            if term.abs() < 1e-19 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        u.ln_1p() - u
    }
}

/// `ln(1 + z) - z` for complex `z` with `|z| < 1` handled by series.
pub fn ln_1p_minus_id_c(z: Complex64) -> Complex64 {
    if z.norm() < SERIES_CUTOFF {
        let mut term = -z * z;
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 2..40 {
            sum += term / k as f64;
            term *= -z;
            if term.norm() < 1e-19 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        ln_1p(z) - z
    }
}

/// `sin(u) - u`.
pub fn sin_minus_id(u: f64) -> f64 {
    if u.abs() < SERIES_CUTOFF {
        let u2 = u * u;
        let mut term = -u * u2 / 6.0;
        let mut sum: f64 = 0.0;
        let mut k = 3.0;
        while term != 0.0 && term.abs() >= 1e-19 * sum.abs() {
            sum += term;
            term *= -u2 / ((k + 1.0) * (k + 2.0));
            k += 2.0;
        }
        sum
    } else {
        u.sin() - u
    }
}

/// `cos(u) - 1`.
pub fn cos_minus_one(u: f64) -> f64 {
    let h = (0.5 * u).sin();
    -2.0 * h * h
}

/// `sin(u)/u - 1`.
pub fn sinc_minus_one(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else if u.abs() < SERIES_CUTOFF {
        sin_minus_id(u) / u
    } else {
        u.sin() / u - 1.0
    }
}
