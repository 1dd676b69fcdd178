//! Monte Carlo oracle: seeded sampling, empirical characteristic functions, and an
//! empirical renormalization flow built from pairwise sums.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::charfn::{empirical_cf, eval_cf_at};
use crate::error::{Error, Result};
use crate::measure::{Atom, Family, Measure, Repr};
use crate::metric::GridSpec;

/// Deepest `CfLevel` that can be sampled (2²⁵ base draws per sample).
pub const MAX_SAMPLE_LEVEL: u32 = 25;
pub const MAX_FLOW_LEVELS: u32 = 12;
pub const MIN_FLOW_SAMPLES: usize = 100_000;
/// Grid for Monte Carlo comparisons: an empirical cf is evaluated in O(n) per point.
pub fn oracle_grid() -> GridSpec {
    GridSpec { xi_min: 0.1, xi_max: 10.0, points_per_decade: 5, symmetric: true }
}

/// Samples per generator stream.
pub const BATCH_SIZE: usize = 1 << 12;

#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub source: Measure,
    pub seed: u64,
    pub values: Vec<f64>,
}

impl SampleBatch {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / self.values.len() as f64
    }

    /// Sample average of `x^k` (or `|x|^k`).
    pub fn moment(&self, k: i32, absolute: bool) -> f64 {
        let f = |x: f64| if absolute { x.abs().powi(k) } else { x.powi(k) };
        self.values.iter().map(|&x| f(x)).sum::<f64>() / self.values.len() as f64
    }

    pub fn cf(&self, xi: f64) -> Complex64 {
        empirical_cf(&self.values, xi).expect("batch is non-empty")
    }
}

/// Generator for batch `index` of the stream identified by `seed`.
pub fn stream(seed: u64, index: u64) -> SplitMix64 {
    let key = SplitMix64::seed_from_u64(seed).next_u64();
    let offset = SplitMix64::seed_from_u64(index).next_u64();
    SplitMix64::seed_from_u64(key ^ offset)
}

/// Uniform on the open interval (0, 1) from the top 53 bits.
fn uniform(rng: &mut SplitMix64) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// `n` independent draws from `m`, deterministic in `(m, n, seed)`.
pub fn sample(m: &Measure, n: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::EmptySamples);
    }
    check_sampleable(m)?;
    let sampler = Sampler::new(m);
    let batches = n.div_ceil(BATCH_SIZE);
    let values = (0..batches)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = stream(seed, b as u64);
            let len = BATCH_SIZE.min(n - b * BATCH_SIZE);
            let sampler = &sampler;
            (0..len).map(move |_| sampler.draw(m, &mut rng)).collect::<Vec<_>>()
        })
        .collect();
    Ok(SampleBatch { source: m.clone(), seed, values })
}

fn check_sampleable(m: &Measure) -> Result<()> {
    match m.repr() {
        Repr::Atomic(_) | Repr::Parametric(_) | Repr::Empirical(_) => Ok(()),
        Repr::CfLevel { base, level } => {
            if *level > MAX_SAMPLE_LEVEL {
                return Err(Error::Unsampleable(format!(
                    "level {level} exceeds {MAX_SAMPLE_LEVEL}"
                )));
            }
            check_sampleable(base)
        }
        Repr::Affine { base, .. } | Repr::ConvPower { base, .. } => check_sampleable(base),
        Repr::Convolution(a, b) => check_sampleable(a).and(check_sampleable(b)),
        Repr::Perturbed { .. } => Err(Error::Unsampleable("perturbed characteristic function".into())),
    }
}

/// Per-measure lookup tables built once per [`sample`] call.
struct Sampler {
    cumulative: Vec<f64>,
}

impl Sampler {
    fn new(m: &Measure) -> Self {
        let cumulative = match m.repr() {
            Repr::Atomic(atoms) => cumulative_weights(atoms),
            _ => Vec::new(),
        };
        Sampler { cumulative }
    }

    fn draw(&self, m: &Measure, rng: &mut SplitMix64) -> f64 {
        match m.repr() {
            Repr::Atomic(atoms) => {
                let u = uniform(rng);
                let i = self.cumulative.partition_point(|&c| c < u).min(atoms.len() - 1);
                atoms[i].position
            }
            _ => draw(m, rng),
        }
    }
}

fn cumulative_weights(atoms: &[Atom]) -> Vec<f64> {
    let mut acc = 0.0;
    atoms
        .iter()
        .map(|a| {
            acc += a.weight;
            acc
        })
        .collect()
}

fn draw(m: &Measure, rng: &mut SplitMix64) -> f64 {
    match m.repr() {
        Repr::Atomic(atoms) => {
            let u = uniform(rng);
            let mut acc = 0.0;
            for a in atoms {
                acc += a.weight;
                if u <= acc {
                    return a.position;
                }
            }
            atoms[atoms.len() - 1].position
        }
        Repr::Parametric(f) => inverse_cdf(f, uniform(rng)),
        Repr::Empirical(xs) => xs[((uniform(rng) * xs.len() as f64) as usize).min(xs.len() - 1)],
        Repr::CfLevel { base, level } => pairwise(base, *level, rng),
        Repr::Affine { base, shift, scale } => shift + scale * draw(base, rng),
        Repr::Convolution(a, b) => draw(a, rng) + draw(b, rng),
        Repr::ConvPower { base, count } => (0..*count).map(|_| draw(base, rng)).sum(),
        Repr::Perturbed { .. } => unreachable!("rejected by check_sampleable"),
    }
}

/// `(X + Y)/√2` applied recursively `level` times.
fn pairwise(base: &Measure, level: u32, rng: &mut SplitMix64) -> f64 {
    if level == 0 {
        return draw(base, rng);
    }
    let x = pairwise(base, level - 1, rng);
    let y = pairwise(base, level - 1, rng);
    (x + y) * FRAC_1_SQRT_2
}

fn inverse_cdf(f: &Family, u: f64) -> f64 {
    match *f {
        Family::Gaussian { mean, variance } => {
            mean + variance.sqrt() * Normal::standard().inverse_cdf(u)
        }
        Family::Uniform { low, high } => low + (high - low) * u,
        Family::Exponential { rate, shift } => shift - (-u).ln_1p() / rate,
        Family::Laplace { location, scale } => {
            if u < 0.5 {
                location + scale * (2.0 * u).ln()
            } else {
                location - scale * (2.0 * (1.0 - u)).ln()
            }
        }
        Family::StudentT3 { mean, variance } => mean + variance.sqrt() * t3_standardized_quantile(u),
    }
}

/// Quantile of the Student t₃ law divided by √3 (unit variance).
///
/// With `t = √3 tan θ` the distribution function is `½ + (θ + sin θ cos θ)/π`.
fn t3_standardized_quantile(u: f64) -> f64 {
    let target = PI * (u - 0.5);
    let (mut lo, mut hi) = (-PI / 2.0, PI / 2.0);
    let mut theta = target / 2.0;
    for _ in 0..100 {
        let g = theta + theta.sin() * theta.cos() - target;
        if g > 0.0 {
            hi = theta;
        } else {
            lo = theta;
        }
        let c = theta.cos();
        let mut next = theta - g / (2.0 * c * c);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - theta).abs() <= 1e-15 * (1.0 + theta.abs()) {
            theta = next;
            break;
        }
        theta = next;
    }
    theta.tan()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowCheckReport {
    pub passed: bool,
    pub max_deviation: f64,
    pub envelope: f64,
    /// Largest deviation at each level `0..=levels`.
    pub per_level: Vec<f64>,
}

impl FlowCheckReport {
    pub const CSV_HEADER: [&'static str; 3] = ["level", "max_deviation", "envelope"];
}

/// Envelope for the modulus deviation of an empirical cf from `n` samples.
pub fn cf_envelope(n: usize) -> f64 {
    4.0 / (n as f64).sqrt()
}

/// Compare empirical cfs of pairwise-summed samples against `T^k m` on the grid for
/// `k = 0..=levels`.
pub fn empirical_flow_check(
    m: &Measure,
    levels: u32,
    n: usize,
    seed: u64,
    grid: &GridSpec,
) -> Result<FlowCheckReport> {
    m.require_q(2.0)?;
    grid.validate()?;
    if levels > MAX_FLOW_LEVELS {
        return Err(Error::TooManySteps { requested: levels, limit: MAX_FLOW_LEVELS });
    }
    if n < MIN_FLOW_SAMPLES {
        return Err(Error::InsufficientSamples { required: MIN_FLOW_SAMPLES, got: n });
    }
    let xis = grid.points();
    let envelope = cf_envelope(n);
    let mut per_level = Vec::with_capacity(levels as usize + 1);
    for k in 0..=levels {
        let level = m.cf_level(k)?;
        let batch = sample(&level, n, seed.wrapping_add(k as u64))?;
        let exact = eval_cf_at(&level, &xis);
        let dev = xis
            .par_iter()
            .zip(exact.par_iter())
            .map(|(&xi, &phi)| (batch.cf(xi) - phi).norm())
            .reduce(|| 0.0, f64::max);
        per_level.push(dev);
    }
    let max_deviation = per_level.iter().copied().fold(0.0, f64::max);
    Ok(FlowCheckReport { passed: max_deviation <= envelope, max_deviation, envelope, per_level })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rademacher() -> Measure {
        Measure::atomic([(-1.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = sample(&rademacher(), 10_000, 7).unwrap();
        let b = sample(&rademacher(), 10_000, 7).unwrap();
        let c = sample(&rademacher(), 10_000, 8).unwrap();
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, c.values);
        assert!(a.values.iter().all(|&x| x == 1.0 || x == -1.0));
    }

    #[test]
    fn prefix_is_stable_across_sizes() {
        let a = sample(&Measure::standard_gaussian(), 100, 3).unwrap();
        let b = sample(&Measure::standard_gaussian(), 5000, 3).unwrap();
        assert_eq!(a.values[..], b.values[..100]);
    }

    #[test]
    fn cf_level_two_is_half_sum_of_four() {
        let lvl = rademacher().cf_level(2).unwrap();
        let s = sample(&lvl, 2000, 11).unwrap();
        assert!(s.values.iter().all(|&x| [-2.0, -1.0, 0.0, 1.0, 2.0]
            .iter()
            .any(|v| (x - v).abs() < 1e-12)));
        assert!(s.values.iter().any(|&x| (x.abs() - 2.0).abs() < 1e-12));
    }

    #[test]
    fn refuses_deep_levels_and_perturbed() {
        let deep = rademacher().cf_level(26).unwrap();
        assert!(matches!(sample(&deep, 1, 0), Err(Error::Unsampleable(_))));
        let p = rademacher().perturbed(1e-3);
        assert!(matches!(sample(&p, 1, 0), Err(Error::Unsampleable(_))));
    }

    #[test]
    fn t3_quantile_inverts_cdf() {
        for u in [1e-9, 0.01, 0.3, 0.5, 0.77, 0.999999] {
            let t = 3f64.sqrt() * t3_standardized_quantile(u);
            let th = (t / 3f64.sqrt()).atan();
            let cdf = 0.5 + (th + th.sin() * th.cos()) / PI;
            assert!((cdf - u).abs() < 1e-13, "u={u} cdf={cdf}");
        }
        assert!(t3_standardized_quantile(0.5).abs() < 1e-15);
    }

    #[test]
    fn parametric_sample_moments() {
        let n = 200_000;
        let tol = 5.0 / (n as f64).sqrt();
        for (tag, params) in [
            ("gaussian", vec![0.5, 2.0]),
            ("uniform", vec![-1.0, 3.0]),
            ("exponential", vec![2.0, -0.5]),
            ("laplace", vec![1.0, 0.5]),
        ] {
            let m = Measure::parametric(tag, &params).unwrap();
            let s = sample(&m, n, 99).unwrap();
            let sd = m.variance().sqrt();
            assert!((s.mean() - m.mean()).abs() < tol * sd, "{tag} mean");
            assert!((s.variance() / m.variance() - 1.0).abs() < 3.0 * tol, "{tag} var");
        }
    }

    #[test]
    fn flow_check_preconditions() {
        let g = oracle_grid();
        let gamma = Measure::standard_gaussian();
        assert!(matches!(
            empirical_flow_check(&gamma, 1, 1000, 0, &g),
            Err(Error::InsufficientSamples { .. })
        ));
        assert!(empirical_flow_check(&gamma, 13, MIN_FLOW_SAMPLES, 0, &g).is_err());
        let r = empirical_flow_check(&gamma, 2, MIN_FLOW_SAMPLES, 5, &g).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.per_level.len(), 3);
    }
}
