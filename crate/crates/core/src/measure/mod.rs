//! Probability measures on the real line.
//!
//! A [`Measure`] is an immutable, cheaply clonable value. Closed-form representations
//! (atomic, parametric, empirical) are kept whenever an operation preserves them;
//! anything else is recorded structurally and evaluated through its characteristic
//! function.

mod family;
mod literal;
mod moments;

use std::sync::{Arc, OnceLock};

pub use family::Family;
pub use literal::MeasureLiteral;
pub use moments::{QMembership, Q_TOLERANCE};

pub(crate) use moments::{dyadic_shrink, Cumulants};

use crate::error::{Error, Result};

/// Atoms closer than this are merged.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Exact atomic convolutions larger than this fall back to a product representation.
const MAX_EXACT_ATOMS: usize = 1 << 20;

/// Deepest supported `CfLevel` iteration count.
pub const MAX_LEVEL: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub position: f64,
    pub weight: f64,
}

/// How a measure is stored.
#[derive(Debug, Clone)]
pub enum Repr {
    /// Finite support; sorted, merged, weights summing to one.
    Atomic(Vec<Atom>),
    Parametric(Family),
    /// `T^level base`, the law of `2^{-level/2}` times a sum of `2^level` copies.
    CfLevel { base: Measure, level: u32 },
    /// Uniform law on a list of samples.
    Empirical(Vec<f64>),
    /// Law of `shift + scale·X`.
    Affine { base: Measure, shift: f64, scale: f64 },
    /// Law of `X + Y` with independent summands.
    Convolution(Measure, Measure),
    /// Law of the sum of `count` independent copies.
    ConvPower { base: Measure, count: u32 },
    /// Characteristic function `φ_base(ξ) + amplitude·ξ²·e^{-ξ²}`.
    ///
    /// Not a probability measure for `amplitude ≠ 0`. It exists so that verification
    /// harnesses can be fault-injected and shown to fail.
    Perturbed { base: Measure, amplitude: f64 },
}

#[derive(Debug)]
struct Inner {
    repr: Repr,
    cumulants: Cumulants,
    /// `(E|X|, E|X|³)`, filled on first use.
    odd_abs: OnceLock<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Measure {
    inner: Arc<Inner>,
}

/// Mean, variance and third moments as cached on a measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary {
    pub mean: f64,
    pub variance: f64,
    pub third_signed: f64,
    pub third_abs: f64,
}

impl Measure {
    fn from_parts(repr: Repr, cumulants: Cumulants) -> Measure {
        Measure { inner: Arc::new(Inner { repr, cumulants, odd_abs: OnceLock::new() }) }
    }

    /// Atomic measure from `(position, weight)` pairs.
    ///
    /// Weights are renormalized to sum to one, positions are sorted, and positions
    /// closer than [`MERGE_TOLERANCE`] are merged with summed weight.
    pub fn atomic<I>(atoms: I) -> Result<Measure>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut raw = Vec::new();
        for (position, weight) in atoms {
            if !(weight > 0.0 && weight.is_finite()) {
                return Err(Error::NonPositiveWeight(weight));
            }
            if !position.is_finite() {
                return Err(Error::NonFinitePosition(position));
            }
            raw.push(Atom { position, weight });
        }
        if raw.is_empty() {
            return Err(Error::EmptyAtoms);
        }
        let total: f64 = raw.iter().map(|a| a.weight).sum();
        raw.iter_mut().for_each(|a| a.weight /= total);
        let atoms = canonicalize(raw);
        let mean = atoms.iter().map(|a| a.weight * a.position).sum();
        Ok(Measure::atomic_with_mean(atoms, mean))
    }

    /// Atoms are already canonical; `mean` is the declared centre used for moments and
    /// characteristic-function evaluation.
    fn atomic_with_mean(atoms: Vec<Atom>, mean: f64) -> Measure {
        let (mut c2, mut c3, mut c4) = (0.0, 0.0, 0.0);
        for a in &atoms {
            let y = a.position - mean;
            let y2 = y * y;
            c2 += a.weight * y2;
            c3 += a.weight * y2 * y;
            c4 += a.weight * y2 * y2;
        }
        Measure::from_parts(Repr::Atomic(atoms), Cumulants::from_central(mean, c2, c3, c4))
    }

    /// Parametric measure; see [`Family::from_tag`] for tags and parameters.
    pub fn parametric(tag: &str, params: &[f64]) -> Result<Measure> {
        Ok(Measure::from_family(Family::from_tag(tag, params)?))
    }

    pub fn from_family(family: Family) -> Measure {
        Measure::from_parts(Repr::Parametric(family), family.cumulants())
    }

    pub fn gaussian(mean: f64, variance: f64) -> Result<Measure> {
        Measure::parametric("gaussian", &[mean, variance])
    }

    /// The standard normal law γ.
    pub fn standard_gaussian() -> Measure {
        Measure::from_family(Family::Gaussian { mean: 0.0, variance: 1.0 })
    }

    /// Point mass at `x`.
    pub fn dirac(x: f64) -> Result<Measure> {
        Measure::atomic([(x, 1.0)])
    }

    /// Uniform law on the given samples.
    pub fn empirical(samples: Vec<f64>) -> Result<Measure> {
        if samples.is_empty() {
            return Err(Error::EmptySamples);
        }
        if let Some(&x) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::NonFinitePosition(x));
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        Ok(Measure::empirical_with_mean(samples, mean))
    }

    fn empirical_with_mean(samples: Vec<f64>, mean: f64) -> Measure {
        let n = samples.len() as f64;
        let (mut c2, mut c3, mut c4) = (0.0, 0.0, 0.0);
        for &x in &samples {
            let y = x - mean;
            let y2 = y * y;
            c2 += y2;
            c3 += y2 * y;
            c4 += y2 * y2;
        }
        Measure::from_parts(
            Repr::Empirical(samples),
            Cumulants::from_central(mean, c2 / n, c3 / n, c4 / n),
        )
    }

    /// `T^level` applied at the characteristic-function level.
    ///
    /// Nested levels compose into a single count; `level = 0` returns `self`.
    pub fn cf_level(&self, level: u32) -> Result<Measure> {
        if level == 0 {
            return Ok(self.clone());
        }
        let (base, total) = match self.repr() {
            Repr::CfLevel { base, level: inner } => (base.clone(), inner + level),
            _ => (self.clone(), level),
        };
        if total > MAX_LEVEL {
            return Err(Error::TooManySteps { requested: total, limit: MAX_LEVEL });
        }
        if let Repr::Parametric(Family::Gaussian { mean, variance }) = *base.repr() {
            let mean = mean / dyadic_shrink(total);
            return Ok(Measure::from_family(Family::Gaussian { mean, variance }));
        }
        let cumulants = base.cumulants().renormalized(total);
        Ok(Measure::from_parts(Repr::CfLevel { base, level: total }, cumulants))
    }

    /// Fault-injection wrapper; see [`Repr::Perturbed`].
    pub fn perturbed(&self, amplitude: f64) -> Measure {
        Measure::from_parts(
            Repr::Perturbed { base: self.clone(), amplitude },
            *self.cumulants(),
        )
    }

    pub fn repr(&self) -> &Repr {
        &self.inner.repr
    }

    pub(crate) fn cumulants(&self) -> &Cumulants {
        &self.inner.cumulants
    }

    /// Whether the characteristic function has a closed form (no composite structure).
    pub fn is_closed_form(&self) -> bool {
        matches!(self.repr(), Repr::Atomic(_) | Repr::Parametric(_) | Repr::Empirical(_))
    }

    pub fn mean(&self) -> f64 {
        self.cumulants().mean()
    }

    pub fn variance(&self) -> f64 {
        self.cumulants().variance()
    }

    /// `E X^k` (or `E|X|^k` when `absolute`), `k ∈ 1..=4`.
    ///
    /// A moment that does not exist is reported as `+∞`.
    pub fn moment(&self, k: u32, absolute: bool) -> Result<f64> {
        if !(1..=4).contains(&k) {
            return Err(Error::UnsupportedOrder(k));
        }
        let c = self.cumulants();
        if k > c.finite_order() {
            return Ok(f64::INFINITY);
        }
        if !absolute || k.is_multiple_of(2) {
            return Ok(c.raw(k));
        }
        let (abs1, abs3) = self.odd_abs_moments();
        Ok(if k == 1 { abs1 } else { abs3 })
    }

    fn odd_abs_moments(&self) -> (f64, f64) {
        *self.inner.odd_abs.get_or_init(|| {
            if !self.is_closed_form() {
                if let Some(exact) = self.materialize_atoms() {
                    return exact.odd_abs_moments();
                }
            }
            let exact = |k: u32| -> Option<f64> {
                match self.repr() {
                    Repr::Atomic(atoms) => Some(
                        atoms.iter().map(|a| a.weight * a.position.abs().powi(k as i32)).sum(),
                    ),
                    Repr::Empirical(xs) => Some(
                        xs.iter().map(|x| x.abs().powi(k as i32)).sum::<f64>() / xs.len() as f64,
                    ),
                    Repr::Parametric(f) => f.abs_moment(k),
                    Repr::Perturbed { base, .. } => base.moment(k, true).ok(),
                    _ => None,
                }
            };
            let get = |k: u32| exact(k).unwrap_or_else(|| moments::abs_moment_by_quadrature(self, k));
            let abs3 = if self.cumulants().finite_order() >= 3 { get(3) } else { f64::INFINITY };
            (get(1), abs3)
        })
    }

    pub fn moment_summary(&self) -> MomentSummary {
        let c = self.cumulants();
        MomentSummary {
            mean: c.mean(),
            variance: c.variance(),
            third_signed: c.raw(3),
            third_abs: self.odd_abs_moments().1,
        }
    }

    /// Membership in `Q_r`, `r ∈ {2, 3}`.
    pub fn q_membership(&self, r: f64) -> Result<QMembership> {
        let order = if r == 2.0 {
            2
        } else if r == 3.0 {
            3
        } else {
            return Err(Error::UnsupportedExponent(r));
        };
        Ok(QMembership::evaluate(r, self.mean(), self.variance(), self.moment(order, true)?))
    }

    /// Error unless the measure belongs to `Q_r`.
    pub fn require_q(&self, r: f64) -> Result<QMembership> {
        let q = self.q_membership(r)?;
        if q.is_member {
            Ok(q)
        } else {
            Err(Error::NotInQ { r, mean: q.mean, variance: q.variance, abs_moment: q.abs_moment_r })
        }
    }

    /// Law of `shift + scale·X`, `scale > 0`.
    pub fn affine(&self, shift: f64, scale: f64) -> Result<Measure> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::NonPositiveScale(scale));
        }
        if shift == 0.0 && scale == 1.0 {
            return Ok(self.clone());
        }
        let map = |x: f64| shift + scale * x;
        let declared_mean = shift + scale * self.mean();
        Ok(match self.repr() {
            Repr::Atomic(atoms) => {
                let moved = atoms
                    .iter()
                    .map(|a| Atom { position: map(a.position), weight: a.weight })
                    .collect();
                Measure::atomic_with_mean(canonicalize(moved), declared_mean)
            }
            Repr::Parametric(f) => Measure::from_family(f.affine(shift, scale)),
            Repr::Empirical(xs) => {
                Measure::empirical_with_mean(xs.iter().map(|&x| map(x)).collect(), declared_mean)
            }
            Repr::Affine { base, shift: s0, scale: l0 } => {
                return base.affine(shift + scale * s0, scale * l0);
            }
            _ => Measure::from_parts(
                Repr::Affine { base: self.clone(), shift, scale },
                self.cumulants().affine(shift, scale),
            ),
        })
    }

    /// Law of `λX`.
    pub fn scale(&self, lambda: f64) -> Result<Measure> {
        self.affine(0.0, lambda)
    }

    /// Law of `(X − mean)/stddev`.
    pub fn standardize(&self) -> Result<Measure> {
        let var = self.variance();
        if self.cumulants().finite_order() < 2 || !(var > 0.0 && var.is_finite()) {
            return Err(Error::Degenerate(var));
        }
        let scale = 1.0 / var.sqrt();
        // shift = -scale·mean makes the declared mean exactly zero
        self.affine(-scale * self.mean(), scale)
    }

    /// Law of `X + Y` for independent `X ~ self`, `Y ~ other`.
    pub fn convolve(&self, other: &Measure) -> Measure {
        if let Some(shift) = other.point_mass() {
            return self.affine(shift, 1.0).expect("unit scale");
        }
        if let Some(shift) = self.point_mass() {
            return other.affine(shift, 1.0).expect("unit scale");
        }
        match (self.repr(), other.repr()) {
            (Repr::Atomic(a), Repr::Atomic(b)) if a.len() * b.len() <= MAX_EXACT_ATOMS => {
                let mut atoms = Vec::with_capacity(a.len() * b.len());
                for x in a {
                    for y in b {
                        let weight = x.weight * y.weight;
                        // underflowed products carry no mass
                        if weight > 0.0 {
                            atoms.push(Atom { position: x.position + y.position, weight });
                        }
                    }
                }
                Measure::atomic_with_mean(canonicalize(atoms), self.mean() + other.mean())
            }
            (
                Repr::Parametric(Family::Gaussian { mean: m1, variance: v1 }),
                Repr::Parametric(Family::Gaussian { mean: m2, variance: v2 }),
            ) => Measure::from_family(Family::Gaussian { mean: m1 + m2, variance: v1 + v2 }),
            _ => Measure::from_parts(
                Repr::Convolution(self.clone(), other.clone()),
                self.cumulants().add(other.cumulants()),
            ),
        }
    }

    /// Law of the sum of `count ≥ 1` independent copies.
    pub fn convolution_power(&self, count: u32) -> Result<Measure> {
        if count == 0 {
            return Measure::dirac(0.0);
        }
        if count == 1 {
            return Ok(self.clone());
        }
        if let Repr::Parametric(Family::Gaussian { mean, variance }) = *self.repr() {
            let c = count as f64;
            return Ok(Measure::from_family(Family::Gaussian { mean: c * mean, variance: c * variance }));
        }
        Ok(Measure::from_parts(
            Repr::ConvPower { base: self.clone(), count },
            self.cumulants().times(count),
        ))
    }

    /// Equivalent atomic measure for composites built from atomic laws, when every
    /// intermediate convolution stays within [`MAX_EXACT_ATOMS`] products.
    fn materialize_atoms(&self) -> Option<Measure> {
        let product = |a: &Measure, b: &Measure| -> Option<Measure> {
            let n = a.atoms()?.len() * b.atoms()?.len();
            (n <= MAX_EXACT_ATOMS).then(|| a.convolve(b))
        };
        let out = match self.repr() {
            Repr::Atomic(_) => self.clone(),
            Repr::Affine { base, shift, scale } => base.materialize_atoms()?.affine(*shift, *scale).ok()?,
            Repr::Convolution(a, b) => {
                product(&a.materialize_atoms()?, &b.materialize_atoms()?)?
            }
            Repr::ConvPower { base, count } => {
                let mut acc = Measure::dirac(0.0).ok()?;
                let mut power = base.materialize_atoms()?;
                let mut k = *count;
                while k > 0 {
                    if k & 1 == 1 {
                        acc = product(&acc, &power)?;
                    }
                    k >>= 1;
                    if k > 0 {
                        power = product(&power, &power)?;
                    }
                }
                acc
            }
            Repr::CfLevel { base, level } => {
                let mut m = base.materialize_atoms()?;
                for _ in 0..*level {
                    m = product(&m, &m)?.scale(std::f64::consts::FRAC_1_SQRT_2).ok()?;
                }
                m
            }
            _ => return None,
        };
        out.atoms().is_some().then_some(out)
    }

    fn point_mass(&self) -> Option<f64> {
        match self.repr() {
            Repr::Atomic(atoms) if atoms.len() == 1 => Some(atoms[0].position),
            _ => None,
        }
    }

    /// Atoms when the representation is atomic.
    pub fn atoms(&self) -> Option<&[Atom]> {
        match self.repr() {
            Repr::Atomic(a) => Some(a),
            _ => None,
        }
    }
}

/// Sort and merge atoms whose positions differ by less than [`MERGE_TOLERANCE`].
fn canonicalize(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    let mut cluster_start = f64::NAN;
    let mut weighted = 0.0;
    for a in atoms {
        match out.last_mut() {
            Some(last) if a.position - cluster_start < MERGE_TOLERANCE => {
                weighted += a.weight * a.position;
                last.weight += a.weight;
                last.position = weighted / last.weight;
            }
            _ => {
                cluster_start = a.position;
                weighted = a.weight * a.position;
                out.push(a);
            }
        }
    }
    out
}
