//! Closed-form parametric families.

use std::f64::consts::{FRAC_2_PI, PI};

use num_complex::Complex64;
use statrs::function::erf::erfc;

use super::moments::Cumulants;
use crate::cmath;
use crate::error::{Error, Result};

/// A parametric law with closed-form characteristic function.
///
/// Every family is closed under `x ↦ shift + scale·x` with `scale > 0`, so affine images
/// of a parametric law stay parametric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Normal law with the given mean and variance.
    Gaussian { mean: f64, variance: f64 },
    /// Uniform law on `[low, high]`.
    Uniform { low: f64, high: f64 },
    /// `shift + E` with `E ~ Exp(rate)`.
    Exponential { rate: f64, shift: f64 },
    /// Laplace law with density `exp(-|x - location|/scale) / (2 scale)`.
    Laplace { location: f64, scale: f64 },
    /// Student t with three degrees of freedom, parametrized by mean and variance.
    /// Finite variance, infinite third absolute moment.
    StudentT3 { mean: f64, variance: f64 },
}

fn invalid(family: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { family, reason: reason.into() }
}

fn finite(family: &'static str, params: &[f64]) -> Result<()> {
    match params.iter().find(|p| !p.is_finite()) {
        Some(p) => Err(invalid(family, format!("parameter {p} is not finite"))),
        None => Ok(()),
    }
}

impl Family {
    /// Build a family from its tag and parameter list.
    ///
    /// | tag          | params                              |
    /// |--------------|-------------------------------------|
    /// | `gaussian`   | `[mean, variance]`                  |
    /// | `uniform`    | `[low, high]`                       |
    /// | `exponential`| `[rate]` or `[rate, shift]`         |
    /// | `laplace`    | `[location, scale]`                 |
    /// | `student-t3` | `[mean, variance]`                  |
    pub fn from_tag(tag: &str, params: &[f64]) -> Result<Family> {
        let arity = |name: &'static str, allowed: &[usize]| -> Result<()> {
            if allowed.contains(&params.len()) {
                finite(name, params)
            } else {
                Err(invalid(name, format!("expected {allowed:?} parameters, got {}", params.len())))
            }
        };
        let family = match tag {
            "gaussian" => {
                arity("gaussian", &[2])?;
                if params[1] <= 0.0 {
                    return Err(invalid("gaussian", "variance must be > 0"));
                }
                Family::Gaussian { mean: params[0], variance: params[1] }
            }
            "uniform" => {
                arity("uniform", &[2])?;
                if params[1] <= params[0] {
                    return Err(invalid("uniform", "need low < high"));
                }
                Family::Uniform { low: params[0], high: params[1] }
            }
            "exponential" => {
                arity("exponential", &[1, 2])?;
                if params[0] <= 0.0 {
                    return Err(invalid("exponential", "rate must be > 0"));
                }
                Family::Exponential { rate: params[0], shift: params.get(1).copied().unwrap_or(0.0) }
            }
            "laplace" => {
                arity("laplace", &[2])?;
                if params[1] <= 0.0 {
                    return Err(invalid("laplace", "scale must be > 0"));
                }
                Family::Laplace { location: params[0], scale: params[1] }
            }
            "student-t3" => {
                arity("student-t3", &[2])?;
                if params[1] <= 0.0 {
                    return Err(invalid("student-t3", "variance must be > 0"));
                }
                Family::StudentT3 { mean: params[0], variance: params[1] }
            }
            other => return Err(Error::UnknownFamily(other.to_string())),
        };
        Ok(family)
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Family::Gaussian { .. } => "gaussian",
            Family::Uniform { .. } => "uniform",
            Family::Exponential { .. } => "exponential",
            Family::Laplace { .. } => "laplace",
            Family::StudentT3 { .. } => "student-t3",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Family::Gaussian { mean, variance } => vec![mean, variance],
            Family::Uniform { low, high } => vec![low, high],
            Family::Exponential { rate, shift } => vec![rate, shift],
            Family::Laplace { location, scale } => vec![location, scale],
            Family::StudentT3 { mean, variance } => vec![mean, variance],
        }
    }

    /// Law of `shift + scale·X`.
    pub(crate) fn affine(&self, shift: f64, scale: f64) -> Family {
        match *self {
            Family::Gaussian { mean, variance } => {
                Family::Gaussian { mean: shift + scale * mean, variance: scale * scale * variance }
            }
            Family::Uniform { low, high } => {
                Family::Uniform { low: shift + scale * low, high: shift + scale * high }
            }
            Family::Exponential { rate, shift: s } => {
                Family::Exponential { rate: rate / scale, shift: shift + scale * s }
            }
            Family::Laplace { location, scale: b } => {
                Family::Laplace { location: shift + scale * location, scale: scale * b }
            }
            Family::StudentT3 { mean, variance } => {
                Family::StudentT3 { mean: shift + scale * mean, variance: scale * scale * variance }
            }
        }
    }

    pub(crate) fn cumulants(&self) -> Cumulants {
        match *self {
            Family::Gaussian { mean, variance } => Cumulants::new([mean, variance, 0.0, 0.0], 4),
            Family::Uniform { low, high } => {
                let h = 0.5 * (high - low);
                let h2 = h * h;
                Cumulants::new([0.5 * (low + high), h2 / 3.0, 0.0, -2.0 * h2 * h2 / 15.0], 4)
            }
            Family::Exponential { rate, shift } => {
                let b = 1.0 / rate;
                Cumulants::new([shift + b, b * b, 2.0 * b * b * b, 6.0 * b * b * b * b], 4)
            }
            Family::Laplace { location, scale } => {
                let b2 = scale * scale;
                Cumulants::new([location, 2.0 * b2, 0.0, 12.0 * b2 * b2], 4)
            }
            Family::StudentT3 { mean, variance } => {
                Cumulants::new([mean, variance, f64::NAN, f64::NAN], 2)
            }
        }
    }

    /// Cumulant function `ln φ(ξ)`.
    pub(crate) fn log_cf(&self, xi: f64) -> Complex64 {
        let i = Complex64::i();
        match *self {
            Family::Gaussian { mean, variance } => {
                Complex64::new(-0.5 * variance * xi * xi, mean * xi)
            }
            Family::Uniform { low, high } => {
                let (c, h) = (0.5 * (low + high), 0.5 * (high - low));
                let sinc = cmath::ln_1p(Complex64::new(cmath::sinc_minus_one(h * xi), 0.0));
                sinc + i * (c * xi)
            }
            Family::Exponential { rate, shift } => {
                // -ln(1 - iξ/λ) = iξ/λ - [ln(1+z) - z] with z = -iξ/λ
                let z = Complex64::new(0.0, -xi / rate);
                i * (xi * (shift + 1.0 / rate)) - cmath::ln_1p_minus_id_c(z)
            }
            Family::Laplace { location, scale } => {
                let bx = scale * xi;
                Complex64::new(-(bx * bx).ln_1p(), location * xi)
            }
            Family::StudentT3 { mean, variance } => {
                let u = variance.sqrt() * xi.abs();
                Complex64::new(cmath::ln_1p_minus_id(u), mean * xi)
            }
        }
    }

    /// `E|X|^k` for odd `k ∈ {1, 3}`; `None` when no closed form is implemented.
    pub(crate) fn abs_moment(&self, k: u32) -> Option<f64> {
        debug_assert!(k == 1 || k == 3);
        let kf = k as f64;
        match *self {
            Family::Gaussian { mean, variance } => Some(gaussian_abs(mean, variance.sqrt(), k)),
            Family::Uniform { low, high } => {
                let anti = |x: f64| x.signum() * x.abs().powi(k as i32 + 1) / (kf + 1.0);
                Some((anti(high) - anti(low)) / (high - low))
            }
            Family::Exponential { rate, shift } => Some(shifted_exponential_abs(rate, shift, k)),
            Family::Laplace { location, scale } => {
                Some(scale.powi(k as i32) * shifted_laplace_abs(location.abs() / scale, k))
            }
            Family::StudentT3 { mean, variance } => match k {
                1 if mean == 0.0 => Some(FRAC_2_PI * variance.sqrt()),
                1 => None,
                _ => Some(f64::INFINITY),
            },
        }
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|j| j as f64).product()
}

/// E|μ + σZ|^k via E X^k − 2 E[X^k; X < 0] and truncated normal moments.
fn gaussian_abs(mu: f64, sigma: f64, k: u32) -> f64 {
    let a = -mu / sigma;
    let cdf = 0.5 * erfc(-a / std::f64::consts::SQRT_2);
    let pdf = (-0.5 * a * a).exp() / (2.0 * PI).sqrt();
    let truncated = [cdf, -pdf, cdf - a * pdf, -(a * a + 2.0) * pdf];
    let full = [1.0, 0.0, 1.0, 0.0];
    let (mut whole, mut lower) = (0.0, 0.0);
    for j in 0..=k {
        let c = binomial(k, j) * mu.powi((k - j) as i32) * sigma.powi(j as i32);
        whole += c * full[j as usize];
        lower += c * truncated[j as usize];
    }
    whole - 2.0 * lower
}

/// E|shift + E|^k, `E ~ Exp(rate)`, odd k.
fn shifted_exponential_abs(rate: f64, shift: f64, k: u32) -> f64 {
    // E[(c - E)^k] for c = -shift
    let c = -shift;
    let mut signed = 0.0;
    for j in 0..=k {
        let ej = factorial(j) / rate.powi(j as i32);
        signed += binomial(k, j) * c.powi((k - j) as i32) * (-1f64).powi(j as i32) * ej;
    }
    if c <= 0.0 {
        -signed
    } else {
        signed + 2.0 * (-rate * c).exp() * factorial(k) / rate.powi(k as i32)
    }
}

/// E|c + L|^k for standard Laplace L and c ≥ 0.
fn shifted_laplace_abs(c: f64, k: u32) -> f64 {
    let kf = factorial(k);
    let mut upper = 0.0;
    let mut inner = 0.0;
    for j in 0..=k {
        upper += binomial(k, j) * c.powi((k - j) as i32) * factorial(j);
        inner += (-1f64).powi(j as i32) * kf / factorial(k - j) * c.powi((k - j) as i32);
    }
    // e^{-c} ∫_0^c u^k e^u du = inner - (-1)^k k! e^{-c}
    let middle = inner - (-1f64).powi(k as i32) * kf * (-c).exp();
    0.5 * ((-c).exp() * kf + upper + middle)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Midpoint rule on a density, fine enough for 1e-7 agreement.
    fn density_abs(pdf: impl Fn(f64) -> f64, lo: f64, hi: f64, k: i32) -> f64 {
        let n = 2_000_000;
        let h = (hi - lo) / n as f64;
        (0..n)
            .map(|j| {
                let x = lo + (j as f64 + 0.5) * h;
                x.abs().powi(k) * pdf(x)
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Family::from_tag("gaussian", &[0.0, -1.0]).is_err());
        assert!(Family::from_tag("uniform", &[1.0, 1.0]).is_err());
        assert!(Family::from_tag("exponential", &[0.0]).is_err());
        assert!(Family::from_tag("laplace", &[0.0]).is_err());
        assert!(Family::from_tag("gaussian", &[f64::NAN, 1.0]).is_err());
        assert!(matches!(Family::from_tag("cauchy", &[0.0, 1.0]), Err(Error::UnknownFamily(_))));
    }

    #[test]
    fn offset_gaussian_abs_moments_match_quadrature() {
        let (mu, s) = (0.7, 1.3);
        let pdf = |x: f64| (-(x - mu) * (x - mu) / (2.0 * s * s)).exp() / (s * (2.0 * PI).sqrt());
        for k in [1, 3] {
            let q = density_abs(pdf, mu - 12.0 * s, mu + 12.0 * s, k as i32);
            assert!((gaussian_abs(mu, s, k) - q).abs() < 1e-7, "k={k}");
        }
    }

    #[test]
    fn shifted_exponential_abs_moments_match_quadrature() {
        let (rate, shift) = (1.7, -0.9);
        let pdf = |x: f64| {
            let y = x - shift;
            if y < 0.0 { 0.0 } else { rate * (-rate * y).exp() }
        };
        for k in [1, 3] {
            let q = density_abs(pdf, shift, shift + 40.0, k as i32);
            assert!((shifted_exponential_abs(rate, shift, k) - q).abs() < 1e-6, "k={k}");
        }
    }

    #[test]
    fn shifted_laplace_abs_moments_match_quadrature() {
        let (loc, b) = (-0.6, 0.8);
        let fam = Family::Laplace { location: loc, scale: b };
        let pdf = |x: f64| (-(x - loc).abs() / b).exp() / (2.0 * b);
        for k in [1, 3] {
            let q = density_abs(pdf, loc - 40.0, loc + 40.0, k as i32);
            assert!((fam.abs_moment(k).unwrap() - q).abs() < 1e-6, "k={k}");
        }
    }

    #[test]
    fn affine_images_stay_in_family() {
        let f = Family::Exponential { rate: 2.0, shift: 0.0 };
        let g = f.affine(-1.0, 2.0);
        assert_eq!(g, Family::Exponential { rate: 1.0, shift: -1.0 });
        let c = g.cumulants();
        assert!((c.raw(1)).abs() < 1e-15);
        assert!((c.raw(2) - 1.0).abs() < 1e-15);
    }
}
