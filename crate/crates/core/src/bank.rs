//! Built-in test measures, all standardized (mean 0, variance 1).

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::measure::Measure;

/// Names accepted by [`alias`].
pub const ALIASES: [&str; 8] = [
    "gaussian",
    "rademacher",
    "skewed",
    "uniform-std",
    "laplace-std",
    "exponential-std",
    "student3-std",
    "pareto-trunc",
];

/// Standard bank of `Q₃` measures.
pub const Q3_BANK: [&str; 5] = ["gaussian", "rademacher", "skewed", "uniform-std", "laplace-std"];

/// `Q₂` measures used for Lyapunov checks; `student3-std` has infinite third moment.
pub const Q2_BANK: [&str; 7] = [
    "rademacher",
    "skewed",
    "uniform-std",
    "laplace-std",
    "exponential-std",
    "student3-std",
    "pareto-trunc",
];

/// Atomic members of the bank.
pub const ATOMIC_BANK: [&str; 3] = ["rademacher", "skewed", "pareto-trunc"];

pub fn alias(name: &str) -> Result<Measure> {
    match name {
        "gaussian" => Ok(Measure::standard_gaussian()),
        "rademacher" => Measure::atomic([(-1.0, 0.5), (1.0, 0.5)]),
        "skewed" => Measure::atomic([(2.0, 0.2), (-0.5, 0.8)]),
        "uniform-std" => {
            let h = 3f64.sqrt();
            Measure::parametric("uniform", &[-h, h])
        }
        "laplace-std" => Measure::parametric("laplace", &[0.0, FRAC_1_SQRT_2]),
        "exponential-std" => Measure::parametric("exponential", &[1.0, -1.0]),
        "student3-std" => Measure::parametric("student-t3", &[0.0, 1.0]),
        "pareto-trunc" => {
            let atoms = (1..=100).flat_map(|k| {
                let w = (k as f64).powi(-4);
                [(-(k as f64), w), (k as f64, w)]
            });
            Measure::atomic(atoms)?.standardize()
        }
        other => Err(Error::UnknownFamily(other.to_string())),
    }
}

pub fn q3_bank() -> Vec<(&'static str, Measure)> {
    Q3_BANK.iter().map(|&n| (n, alias(n).expect("built-in"))).collect()
}

pub fn q2_bank() -> Vec<(&'static str, Measure)> {
    Q2_BANK.iter().map(|&n| (n, alias(n).expect("built-in"))).collect()
}
