//! Fourier-based distances d_s(ν, μ) = sup_{ξ≠0} |φ_ν(ξ) − φ_μ(ξ)| / |ξ|^s for s ∈ {2, 3}.
//!
//! The supremum is split into three regimes: a symmetric log-spaced grid on
//! `[xi_min, xi_max]`, the exact ξ → 0 limit from the Taylor coefficients, and the
//! bound `2/xi_max^s` on everything beyond the grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charfn::cf_minus_one;
use crate::error::{Error, Result};
use crate::measure::{Measure, Q_TOLERANCE};

/// Slack on every inequality check.
pub const INEQUALITY_SLACK: f64 = 1e-8;
/// Slack on the tail certificate.
pub const CERTIFICATE_SLACK: f64 = 1e-9;
/// Tolerance on the matched-grid scaling ratio.
pub const IDEALITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub xi_min: f64,
    pub xi_max: f64,
    pub points_per_decade: u32,
    pub symmetric: bool,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { xi_min: 1e-3, xi_max: 50.0, points_per_decade: 200, symmetric: true }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.xi_min > 0.0 && self.xi_min.is_finite()) {
            return Err(Error::InvalidGrid(format!("xi_min must be > 0, got {}", self.xi_min)));
        }
        if !(self.xi_max > self.xi_min && self.xi_max.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "xi_max must exceed xi_min, got [{}, {}]",
                self.xi_min, self.xi_max
            )));
        }
        if self.points_per_decade == 0 {
            return Err(Error::InvalidGrid("points_per_decade must be positive".into()));
        }
        if !self.symmetric {
            return Err(Error::InvalidGrid("grids are always symmetric".into()));
        }
        Ok(())
    }

    /// `xi_min · 10^{j/ppd}` up to `xi_max`, with `xi_max` appended if not hit.
    ///
    /// Doubling `points_per_decade` yields a superset.
    pub fn positive_points(&self) -> Vec<f64> {
        let ppd = self.points_per_decade as f64;
        let mut pts = Vec::new();
        for j in 0u32.. {
            let xi = self.xi_min * 10f64.powf(j as f64 / ppd);
            if xi > self.xi_max * (1.0 + 1e-12) {
                break;
            }
            pts.push(xi);
        }
        if pts.last().is_some_and(|&last| last < self.xi_max * (1.0 - 1e-12)) {
            pts.push(self.xi_max);
        }
        pts
    }

    /// All grid points in increasing order: negatives first.
    pub fn points(&self) -> Vec<f64> {
        let pos = self.positive_points();
        pos.iter().rev().map(|x| -x).chain(pos.iter().copied()).collect()
    }

    /// Grid whose points map onto this one under ξ ↦ λξ.
    pub fn rescaled(&self, lambda: f64) -> GridSpec {
        GridSpec { xi_min: self.xi_min / lambda, xi_max: self.xi_max / lambda, ..*self }
    }

    pub fn refined(&self) -> GridSpec {
        GridSpec { points_per_decade: 2 * self.points_per_decade, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistanceResult {
    pub s: f64,
    pub xi_min: f64,
    pub xi_max: f64,
    /// `max(grid_sup, zero_limit)`.
    pub value: f64,
    pub grid_sup: f64,
    pub grid_argmax: f64,
    pub zero_limit: f64,
    pub tail_bound: f64,
    /// The uncomputed tail cannot exceed `value`.
    pub certified: bool,
}

impl DistanceResult {
    pub const CSV_HEADER: [&'static str; 9] = [
        "s",
        "xi_min",
        "xi_max",
        "grid_sup",
        "grid_argmax",
        "zero_limit",
        "tail_bound",
        "value",
        "certified",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        use crate::report::fmt_f64;
        vec![
            fmt_f64(self.s),
            fmt_f64(self.xi_min),
            fmt_f64(self.xi_max),
            fmt_f64(self.grid_sup),
            fmt_f64(self.grid_argmax),
            fmt_f64(self.zero_limit),
            fmt_f64(self.tail_bound),
            fmt_f64(self.value),
            self.certified.to_string(),
        ]
    }
}

fn check_exponent(s: f64) -> Result<()> {
    if s == 2.0 || s == 3.0 {
        Ok(())
    } else {
        Err(Error::UnsupportedExponent(s))
    }
}

/// d_s between two members of Q_s.
pub fn ds_distance(a: &Measure, b: &Measure, s: f64, grid: &GridSpec) -> Result<DistanceResult> {
    check_exponent(s)?;
    a.require_q(s)?;
    b.require_q(s)?;
    ds_distance_unchecked(a, b, s, grid)
}

/// d_s without the Q_s gate.
///
/// Used for convolutions and rescalings of Q_s laws, which leave the space but keep the
/// matched low-order moments that make the distance finite.
pub fn ds_distance_unchecked(
    a: &Measure,
    b: &Measure,
    s: f64,
    grid: &GridSpec,
) -> Result<DistanceResult> {
    check_exponent(s)?;
    grid.validate()?;
    let zero = zero_limit_unchecked(a, b, s)?;
    let points = grid.points();
    let ratios: Vec<f64> = points
        .par_iter()
        .map(|&xi| (cf_minus_one(a, xi) - cf_minus_one(b, xi)).norm() / xi.abs().powf(s))
        .collect();

    let (mut best, mut arg) = (0.0f64, 0.0f64);
    let mut nan_seen = false;
    for (&xi, &r) in points.iter().zip(&ratios) {
        if r.is_nan() {
            nan_seen = true;
            continue;
        }
        let closer = xi.abs() < arg.abs() || (xi.abs() == arg.abs() && xi > arg);
        if r > best || (r == best && r > 0.0 && closer) {
            best = r;
            arg = xi;
        }
    }
    if nan_seen {
        best = f64::NAN;
    }
    let value = if best.is_nan() { f64::NAN } else { best.max(zero) };
    let tail_bound = 2.0 / grid.xi_max.powf(s);
    Ok(DistanceResult {
        s,
        xi_min: grid.xi_min,
        xi_max: grid.xi_max,
        value,
        grid_sup: best,
        grid_argmax: arg,
        zero_limit: zero,
        tail_bound,
        certified: tail_bound <= value + CERTIFICATE_SLACK,
    })
}

/// lim_{ξ→0} |φ_a(ξ) − φ_b(ξ)| / |ξ|^s for members of Q_s.
///
/// For s = 3 this is |E_a X³ − E_b X³| / 6; for s = 2 it vanishes.
pub fn zero_limit(a: &Measure, b: &Measure, s: f64) -> Result<f64> {
    check_exponent(s)?;
    a.require_q(s)?;
    b.require_q(s)?;
    zero_limit_unchecked(a, b, s)
}

fn zero_limit_unchecked(a: &Measure, b: &Measure, s: f64) -> Result<f64> {
    let differs = |x: f64, y: f64| (x - y).abs() > Q_TOLERANCE * (1.0 + x.abs().max(y.abs()));
    let (ma, mb) = (a.moment(1, false)?, b.moment(1, false)?);
    if differs(ma, mb) {
        return Ok(f64::INFINITY);
    }
    let (va, vb) = (a.moment(2, false)?, b.moment(2, false)?);
    if s == 2.0 {
        return Ok(0.5 * (va - vb).abs());
    }
    if differs(va, vb) {
        return Ok(f64::INFINITY);
    }
    let (ta, tb) = (a.moment(3, false)?, b.moment(3, false)?);
    if !(ta.is_finite() && tb.is_finite()) {
        return Err(Error::InfiniteThirdMoment);
    }
    Ok((ta - tb).abs() / 6.0)
}

/// Outcome of an inequality `lhs ≤ rhs + slack`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
}

impl InequalityCheck {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        InequalityCheck { holds: lhs <= rhs + INEQUALITY_SLACK, lhs, rhs, margin: rhs - lhs }
    }
}

/// d_s(ν₁*ν₂, μ₁*μ₂) ≤ d_s(ν₁, μ₁) + d_s(ν₂, μ₂).
pub fn check_convolution_subadditivity(
    nu1: &Measure,
    nu2: &Measure,
    mu1: &Measure,
    mu2: &Measure,
    s: f64,
    grid: &GridSpec,
) -> Result<InequalityCheck> {
    let first = ds_distance(nu1, mu1, s, grid)?;
    let second = ds_distance(nu2, mu2, s, grid)?;
    let joint = ds_distance_unchecked(&nu1.convolve(nu2), &mu1.convolve(mu2), s, grid)?;
    Ok(InequalityCheck::new(joint.value, first.value + second.value))
}

/// Ratio d_s([ν]_λ, [μ]_λ) / (λ^s d_s(ν, μ)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingCheck {
    pub holds: bool,
    pub lambda: f64,
    /// Scaled distance evaluated on the grid rescaled by 1/λ, whose evaluation points
    /// coincide with the original ones.
    pub ratio: f64,
    /// Same ratio with both distances on the original grid; informational, since the
    /// two evaluations then sample different points.
    pub unmatched_ratio: f64,
    pub base: f64,
    pub scaled: f64,
}

pub fn check_scaling_ideality(
    nu: &Measure,
    mu: &Measure,
    lambda: f64,
    s: f64,
    grid: &GridSpec,
) -> Result<ScalingCheck> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::NonPositiveScale(lambda));
    }
    let base = ds_distance(nu, mu, s, grid)?.value;
    let (snu, smu) = (nu.scale(lambda)?, mu.scale(lambda)?);
    let scaled = ds_distance_unchecked(&snu, &smu, s, &grid.rescaled(lambda))?.value;
    let unmatched = ds_distance_unchecked(&snu, &smu, s, grid)?.value;
    let factor = lambda.powf(s);
    let ratio_of = |x: f64| {
        if base == 0.0 {
            if x == 0.0 { 1.0 } else { f64::INFINITY }
        } else {
            x / (factor * base)
        }
    };
    let ratio = ratio_of(scaled);
    Ok(ScalingCheck {
        holds: (ratio - 1.0).abs() <= IDEALITY_TOLERANCE && ratio <= 1.0 + INEQUALITY_SLACK,
        lambda,
        ratio,
        unmatched_ratio: ratio_of(unmatched),
        base,
        scaled,
    })
}

/// d_s(ν*η, μ*η) ≤ d_s(ν, μ).
pub fn check_convolution_invariance(
    nu: &Measure,
    mu: &Measure,
    eta: &Measure,
    s: f64,
    grid: &GridSpec,
) -> Result<InequalityCheck> {
    let before = ds_distance(nu, mu, s, grid)?.value;
    let after = ds_distance_unchecked(&nu.convolve(eta), &mu.convolve(eta), s, grid)?.value;
    Ok(InequalityCheck::new(after, before))
}

/// d_s(a, c) ≤ d_s(a, b) + d_s(b, c).
pub fn check_triangle(
    a: &Measure,
    b: &Measure,
    c: &Measure,
    s: f64,
    grid: &GridSpec,
) -> Result<InequalityCheck> {
    let ac = ds_distance(a, c, s, grid)?.value;
    let ab = ds_distance(a, b, s, grid)?.value;
    let bc = ds_distance(b, c, s, grid)?.value;
    Ok(InequalityCheck::new(ac, ab + bc))
}

/// d_s(ν*ν, μ*μ) ≤ 2 d_s(ν, μ), the generic bound for metrics that are suprema of
/// weighted expectation differences.
pub fn check_self_convolution_bound(
    nu: &Measure,
    mu: &Measure,
    s: f64,
    grid: &GridSpec,
) -> Result<InequalityCheck> {
    let before = ds_distance(nu, mu, s, grid)?.value;
    let after = ds_distance_unchecked(&nu.convolve(nu), &mu.convolve(mu), s, grid)?.value;
    Ok(InequalityCheck::new(after, 2.0 * before))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn rademacher() -> Measure {
        Measure::atomic([(-1.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    fn skewed() -> Measure {
        Measure::atomic([(2.0, 0.2), (-0.5, 0.8)]).unwrap()
    }

    fn gamma() -> Measure {
        Measure::standard_gaussian()
    }

    #[test]
    fn default_grid_shape() {
        let g = GridSpec::default();
        let pos = g.positive_points();
        assert_eq!(pos[0], 1e-3);
        assert_eq!(*pos.last().unwrap(), 50.0);
        assert_eq!(pos.len(), 941);
        let all = g.points();
        assert_eq!(all.len(), 2 * pos.len());
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn refined_grid_is_superset() {
        let g = GridSpec::default();
        let fine = g.refined().positive_points();
        for x in g.positive_points() {
            assert!(fine.contains(&x), "{x}");
        }
    }

    #[test]
    fn invalid_grids() {
        let bad = |g: GridSpec| g.validate().is_err();
        assert!(bad(GridSpec { xi_min: 0.0, ..GridSpec::default() }));
        assert!(bad(GridSpec { xi_max: 1e-4, ..GridSpec::default() }));
        assert!(bad(GridSpec { points_per_decade: 0, ..GridSpec::default() }));
        assert!(bad(GridSpec { symmetric: false, ..GridSpec::default() }));
    }

    #[test]
    fn identical_measures_are_at_distance_zero() {
        let d = ds_distance(&gamma(), &gamma(), 3.0, &GridSpec::default()).unwrap();
        assert_eq!(d.value, 0.0);
        assert!(!d.certified);
    }

    #[test]
    fn zero_limits() {
        assert!((zero_limit(&skewed(), &gamma(), 3.0).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(zero_limit(&rademacher(), &gamma(), 3.0).unwrap(), 0.0);
        assert_eq!(zero_limit(&skewed(), &rademacher(), 2.0).unwrap(), 0.0);
    }

    #[test]
    fn gate_rejects_non_members() {
        let u = Measure::parametric("uniform", &[0.0, 1.0]).unwrap();
        assert!(matches!(ds_distance(&u, &gamma(), 3.0, &GridSpec::default()), Err(Error::NotInQ { .. })));
        let t = Measure::parametric("student-t3", &[0.0, 1.0]).unwrap();
        assert!(ds_distance(&t, &gamma(), 3.0, &GridSpec::default()).is_err());
        assert!(ds_distance(&t, &gamma(), 2.0, &GridSpec::default()).is_ok());
        assert_eq!(
            ds_distance(&gamma(), &gamma(), 2.5, &GridSpec::default()).unwrap_err(),
            Error::UnsupportedExponent(2.5)
        );
    }

    #[test]
    fn skewed_distance_is_its_zero_limit() {
        let d = ds_distance(&skewed(), &gamma(), 3.0, &GridSpec::default()).unwrap();
        assert!(d.grid_sup < d.zero_limit);
        assert_eq!(d.value, d.zero_limit);
        assert!(d.certified);
    }

    #[test]
    fn symmetric_in_arguments() {
        let g = GridSpec::default();
        let ab = ds_distance(&rademacher(), &skewed(), 2.0, &g).unwrap();
        let ba = ds_distance(&skewed(), &rademacher(), 2.0, &g).unwrap();
        assert_eq!(ab.value, ba.value);
        assert_eq!(ab.grid_argmax, ba.grid_argmax);
    }

    #[test]
    fn argmax_prefers_positive_side() {
        let d = ds_distance(&rademacher(), &gamma(), 3.0, &GridSpec::default()).unwrap();
        assert!(d.grid_argmax > 0.0);
    }

    #[test]
    fn unit_scaling_has_ratio_one() {
        let c = check_scaling_ideality(&rademacher(), &gamma(), 1.0, 3.0, &GridSpec::default()).unwrap();
        assert_eq!(c.ratio, 1.0);
        assert!(c.holds);
        assert!(check_scaling_ideality(&rademacher(), &gamma(), 0.0, 3.0, &GridSpec::default()).is_err());
    }

    #[test]
    fn scaling_is_exact_on_matched_grids() {
        let g = GridSpec::default();
        let c = check_scaling_ideality(&rademacher(), &gamma(), FRAC_1_SQRT_2, 3.0, &g).unwrap();
        assert!(c.holds, "{c:?}");
        let c = check_scaling_ideality(&skewed(), &gamma(), 2.0, 2.0, &g).unwrap();
        assert!(c.holds, "{c:?}");
    }

    #[test]
    fn dirac_convolution_is_neutral() {
        let g = GridSpec::default();
        let d0 = Measure::dirac(0.0).unwrap();
        let c = check_convolution_invariance(&rademacher(), &gamma(), &d0, 3.0, &g).unwrap();
        assert_eq!(c.margin, 0.0);
        assert!(c.holds);
    }

    #[test]
    fn gaussian_smoothing_contracts_strictly() {
        let c = check_convolution_invariance(&rademacher(), &gamma(), &gamma(), 3.0, &GridSpec::default())
            .unwrap();
        assert!(c.holds && c.margin > 0.0, "{c:?}");
    }

    #[test]
    fn triangle_and_subadditivity() {
        let g = GridSpec::default();
        assert!(check_triangle(&rademacher(), &skewed(), &gamma(), 3.0, &g).unwrap().holds);
        let c = check_convolution_subadditivity(&skewed(), &rademacher(), &gamma(), &gamma(), 3.0, &g)
            .unwrap();
        assert!(c.holds && c.margin >= 0.0);
    }

    #[test]
    fn perturbation_breaks_finiteness_near_zero() {
        let g = GridSpec::default();
        let p = gamma().perturbed(1e-3);
        let d = ds_distance(&p, &gamma(), 3.0, &g).unwrap();
        assert!((d.grid_sup - 1e-3 / 1e-3).abs() < 1e-3);
    }
}
