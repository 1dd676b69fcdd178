//! Characteristic functions φ(ξ) = E e^{iξX}.
//!
//! Evaluation goes through the cumulant function K = ln φ. Composite measures combine
//! cumulant functions (sums for convolution, dyadic rescaling for T-iterates), which keeps
//! `T^n` exact at any depth: φ_{T^n ν}(ξ) = φ_ν(2^{-n/2}ξ)^{2^n} is formed as
//! `exp(2^n · K_ν(2^{-n/2} ξ))`, equivalent to `n` successive squarings of the complex value.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cmath;
use crate::error::{Error, Result};
use crate::measure::{dyadic_shrink, Measure, Repr};
use crate::metric::GridSpec;

/// `ln φ(ξ)` on the principal branch of each factor.
pub fn log_cf(m: &Measure, xi: f64) -> Complex64 {
    match m.repr() {
        Repr::Atomic(atoms) => {
            let centre = m.mean();
            let psi = atoms.iter().fold(Complex64::new(0.0, 0.0), |acc, a| {
                let u = xi * (a.position - centre);
                acc + a.weight * Complex64::new(cmath::cos_minus_one(u), cmath::sin_minus_id(u))
            });
            cmath::ln_1p(psi) + Complex64::new(0.0, xi * centre)
        }
        Repr::Empirical(xs) => {
            let centre = m.mean();
            let sum = xs.iter().fold(Complex64::new(0.0, 0.0), |acc, &x| {
                let u = xi * (x - centre);
                acc + Complex64::new(cmath::cos_minus_one(u), cmath::sin_minus_id(u))
            });
            cmath::ln_1p(sum / xs.len() as f64) + Complex64::new(0.0, xi * centre)
        }
        Repr::Parametric(f) => f.log_cf(xi),
        Repr::CfLevel { base, level } => {
            let copies = (1u64 << level) as f64;
            log_cf(base, xi * dyadic_shrink(*level)) * copies
        }
        Repr::Affine { base, shift, scale } => {
            log_cf(base, scale * xi) + Complex64::new(0.0, shift * xi)
        }
        Repr::Convolution(a, b) => log_cf(a, xi) + log_cf(b, xi),
        Repr::ConvPower { base, count } => log_cf(base, xi) * (*count as f64),
        Repr::Perturbed { .. } => cmath::ln_1p(cf_minus_one(m, xi)),
    }
}

/// `φ(ξ) − 1`, accurate to relative precision as ξ → 0.
pub fn cf_minus_one(m: &Measure, xi: f64) -> Complex64 {
    match m.repr() {
        Repr::Perturbed { base, amplitude } => {
            cf_minus_one(base, xi) + amplitude * xi * xi * (-xi * xi).exp()
        }
        _ => cmath::expm1(log_cf(m, xi)),
    }
}

pub fn eval_cf(m: &Measure, xi: f64) -> Complex64 {
    let value = match m.repr() {
        Repr::Perturbed { .. } => 1.0 + cf_minus_one(m, xi),
        _ => {
            let k = log_cf(m, xi);
            if k.re == f64::NEG_INFINITY { Complex64::new(0.0, 0.0) } else { k.exp() }
        }
    };
    debug_assert!(
        matches!(m.repr(), Repr::Perturbed { .. }) || value.norm() <= 1.0 + 1e-12,
        "|φ({xi})| = {} exceeds one",
        value.norm()
    );
    value
}

/// `eval_cf` at every grid point, in grid order.
pub fn eval_cf_grid(m: &Measure, grid: &GridSpec) -> Vec<Complex64> {
    eval_cf_at(m, &grid.points())
}

pub fn eval_cf_at(m: &Measure, xis: &[f64]) -> Vec<Complex64> {
    xis.par_iter().map(|&xi| eval_cf(m, xi)).collect()
}

/// Plain sample average `(1/N) Σ e^{iξx_j}`.
pub fn empirical_cf(samples: &[f64], xi: f64) -> Result<Complex64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let sum = samples.iter().fold(Complex64::new(0.0, 0.0), |acc, &x| {
        let (s, c) = (xi * x).sin_cos();
        acc + Complex64::new(c, s)
    });
    Ok(sum / samples.len() as f64)
}

/// `|φ(ξ) − 1 + ξ²/2| / ξ²`, the remainder of the second-order expansion for laws in Q₂.
pub fn quadratic_remainder(m: &Measure, xi: f64) -> f64 {
    (cf_minus_one(m, xi) + 0.5 * xi * xi).norm() / (xi * xi)
}

/// A measure viewed through its characteristic function.
#[derive(Debug, Clone, Copy)]
pub struct CharFn<'a> {
    pub source: &'a Measure,
    pub closed_form: bool,
}

impl<'a> CharFn<'a> {
    pub fn new(source: &'a Measure) -> Self {
        CharFn { source, closed_form: source.is_closed_form() }
    }

    pub fn eval(&self, xi: f64) -> Complex64 {
        eval_cf(self.source, xi)
    }

    pub fn eval_grid(&self, grid: &GridSpec) -> Vec<Complex64> {
        eval_cf_grid(self.source, grid)
    }

    pub fn taylor_data(&self) -> Result<TaylorData> {
        taylor_data(self.source)
    }
}

/// Coefficients of φ(ξ) = 1 + iE[X]ξ − E[X²]ξ²/2 − iE[X³]ξ³/6 + h(ξ)ξ³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorData {
    pub mean: f64,
    pub variance: f64,
    pub third_signed: f64,
    /// Largest dyadic radius `r ≤ 1` on which the cubic model is within
    /// `REMAINDER_FRACTION · |ξ|³ · E|X|³` of φ at every sampled ξ.
    pub remainder_radius: f64,
}

pub const REMAINDER_FRACTION: f64 = 0.05;
pub const REMAINDER_RESOLUTION: f64 = 1e-3;

pub fn taylor_data(m: &Measure) -> Result<TaylorData> {
    let abs3 = m.moment(3, true)?;
    if !abs3.is_finite() {
        return Err(Error::InfiniteThirdMoment);
    }
    let (m1, m2, m3) = (m.moment(1, false)?, m.moment(2, false)?, m.moment(3, false)?);
    let model = |xi: f64| {
        let xi2 = xi * xi;
        Complex64::new(-0.5 * m2 * xi2, m1 * xi - m3 * xi2 * xi / 6.0)
    };
    let steps = (1.0 / REMAINDER_RESOLUTION).round() as usize;
    let first_failure = (1..=steps)
        .flat_map(|k| {
            let xi = k as f64 * REMAINDER_RESOLUTION;
            [xi, -xi]
        })
        .find(|&xi| {
            let err = (cf_minus_one(m, xi) - model(xi)).norm();
            err > REMAINDER_FRACTION * xi.abs().powi(3) * abs3
        })
        .map(f64::abs);
    let mut radius = 1.0;
    if let Some(fail) = first_failure {
        while radius >= fail {
            radius *= 0.5;
        }
    }
    Ok(TaylorData { mean: m1, variance: m.variance(), third_signed: m3, remainder_radius: radius })
}
