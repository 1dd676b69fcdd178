//! The renormalization map T ν = law of (X + Y)/√2, its iterates, and the contraction,
//! rate and Lyapunov measurements taken along trajectories.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{Family, Measure, Repr};
use crate::metric::{ds_distance, GridSpec, InequalityCheck};
use crate::report::{fmt_f64, fmt_opt};

/// Contraction constant of T in d₃.
pub const CONTRACTION_CONSTANT: f64 = FRAC_1_SQRT_2;
pub const CONTRACTION_SLACK: f64 = 1e-6;
/// Deepest trajectory accepted by [`renorm_trajectory`].
pub const MAX_TRAJECTORY: u32 = 40;
/// Distances at or below this are treated as zero when fitting or forming ratios.
pub const DISTANCE_FLOOR: f64 = 1e-12;
pub const RATIO_FLOOR: f64 = 1e-14;
/// Proxy for ν ≠ γ in the Lyapunov checks.
pub const DISTINCT_FROM_GAUSSIAN: f64 = 1e-9;
pub const LYAPUNOV_MARGIN: f64 = 1e-10;

/// One application of T.
///
/// Atomic laws stay atomic (exact self-convolution, then rescaling); the Gaussian family
/// is closed under T; everything else moves one level deeper at the cf level.
pub fn renorm_step(nu: &Measure) -> Result<Measure> {
    nu.require_q(2.0)?;
    match nu.repr() {
        Repr::Atomic(_) | Repr::Parametric(Family::Gaussian { .. }) => {
            nu.convolve(nu).scale(FRAC_1_SQRT_2)
        }
        _ => nu.cf_level(1),
    }
}

/// `T^n ν` at the cf level.
pub fn renorm_power(nu: &Measure, n: u32) -> Result<Measure> {
    nu.require_q(2.0)?;
    nu.cf_level(n)
}

#[derive(Debug, Clone)]
pub struct FlowReport {
    pub base: Measure,
    pub steps: u32,
    /// `d₃(T^n ν, γ)` for `n = 0..=steps`; `None` unless ν ∈ Q₃.
    pub distances_d3: Option<Vec<f64>>,
    /// `d₂(T^n ν, γ)` for `n = 0..=steps`.
    pub distances_d2: Vec<f64>,
    /// `distances_d3[n+1] / distances_d3[n]`, NaN where the denominator is below
    /// [`RATIO_FLOOR`] or d₃ is unavailable.
    pub contraction_ratios: Vec<f64>,
    /// Least-squares slope of log₂ d₃ against n over `n ≥ 2`.
    pub fitted_slope_log2: Option<f64>,
    pub lyapunov_monotone: bool,
}

impl FlowReport {
    pub const CSV_HEADER: [&'static str; 4] = ["n", "d3", "d2", "ratio"];

    /// One row per step; `ratio` on row n is `d3[n]/d3[n-1]`. A final row carries the
    /// fitted slope.
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let mut rows = Vec::with_capacity(self.steps as usize + 2);
        for n in 0..=self.steps as usize {
            let d3 = self.distances_d3.as_ref().map(|d| d[n]);
            let ratio = if n == 0 { None } else { Some(self.contraction_ratios[n - 1]).filter(|r| r.is_finite()) };
            rows.push(vec![n.to_string(), fmt_opt(d3), fmt_f64(self.distances_d2[n]), fmt_opt(ratio)]);
        }
        rows.push(vec![
            "fitted_slope_log2".to_string(),
            fmt_opt(self.fitted_slope_log2),
            String::new(),
            String::new(),
        ]);
        rows
    }
}

/// Iterate T `steps` times from ν and record distances to γ.
pub fn renorm_trajectory(nu: &Measure, steps: u32, grid: &GridSpec) -> Result<FlowReport> {
    nu.require_q(2.0)?;
    if steps == 0 || steps > MAX_TRAJECTORY {
        return Err(Error::TooManySteps { requested: steps, limit: MAX_TRAJECTORY });
    }
    let gamma = Measure::standard_gaussian();
    let in_q3 = nu.q_membership(3.0)?.is_member;
    let mut d2 = Vec::with_capacity(steps as usize + 1);
    let mut d3 = Vec::with_capacity(steps as usize + 1);
    for n in 0..=steps {
        let iterate = nu.cf_level(n)?;
        d2.push(ds_distance(&iterate, &gamma, 2.0, grid)?.value);
        if in_q3 {
            d3.push(ds_distance(&iterate, &gamma, 3.0, grid)?.value);
        }
    }
    let contraction_ratios = (0..steps as usize)
        .map(|n| match d3.get(n) {
            Some(&den) if den > RATIO_FLOOR => d3[n + 1] / den,
            _ => f64::NAN,
        })
        .collect();
    let lyapunov_monotone = d2.windows(2).all(|w| w[0] <= DISTANCE_FLOOR || w[1] < w[0]);
    let fitted_slope_log2 = if in_q3 { fit_log2_slope(&d3, 2) } else { None };
    Ok(FlowReport {
        base: nu.clone(),
        steps,
        distances_d3: in_q3.then_some(d3),
        distances_d2: d2,
        contraction_ratios,
        fitted_slope_log2,
        lyapunov_monotone,
    })
}

/// Unweighted least-squares slope of log₂ values[n] against n for n ≥ `from`, skipping
/// values at or below [`DISTANCE_FLOOR`].
pub fn fit_log2_slope(values: &[f64], from: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .skip(from)
        .filter(|(_, &v)| v > DISTANCE_FLOOR)
        .map(|(n, &v)| (n as f64, v.log2()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionCheck {
    pub holds: bool,
    /// `d₃(Tν, Tμ) / d₃(ν, μ)`.
    pub ratio: f64,
    pub before: f64,
    pub after: f64,
}

pub fn contraction_ratio(nu: &Measure, mu: &Measure, grid: &GridSpec) -> Result<ContractionCheck> {
    let before = ds_distance(nu, mu, 3.0, grid)?.value;
    if before <= DISTANCE_FLOOR {
        return Err(Error::Indistinguishable(before));
    }
    let after = ds_distance(&renorm_step(nu)?, &renorm_step(mu)?, 3.0, grid)?.value;
    let ratio = after / before;
    Ok(ContractionCheck {
        holds: ratio <= CONTRACTION_CONSTANT + CONTRACTION_SLACK,
        ratio,
        before,
        after,
    })
}

/// Law of `n^{-1/2}(X_1 + … + X_n)`.
pub fn normalized_sum(nu: &Measure, n: u32) -> Result<Measure> {
    if n == 0 {
        return Err(Error::TooManySteps { requested: 0, limit: u32::MAX });
    }
    nu.convolution_power(n)?.scale(1.0 / (n as f64).sqrt())
}

/// d₃([ν^{*n}]_{n^{-1/2}}, γ) ≤ d₃(ν, γ)/√n for any n ≥ 1.
pub fn clt_rate_check(nu: &Measure, n: u32, grid: &GridSpec) -> Result<InequalityCheck> {
    nu.require_q(3.0)?;
    let gamma = Measure::standard_gaussian();
    let start = ds_distance(nu, &gamma, 3.0, grid)?.value;
    let sum = normalized_sum(nu, n)?;
    let lhs = ds_distance(&sum, &gamma, 3.0, grid)?.value;
    Ok(InequalityCheck::new(lhs, start / (n as f64).sqrt()))
}

/// V(ν) = d₂(ν, γ).
pub fn lyapunov_value(nu: &Measure, grid: &GridSpec) -> Result<f64> {
    Ok(ds_distance(nu, &Measure::standard_gaussian(), 2.0, grid)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LyapunovCheck {
    pub holds: bool,
    /// V(ν).
    pub before: f64,
    /// V(Tν).
    pub after: f64,
}

/// V(Tν) < V(ν) with margin above [`LYAPUNOV_MARGIN`].
pub fn lyapunov_decrease_check(nu: &Measure, grid: &GridSpec) -> Result<LyapunovCheck> {
    let before = lyapunov_value(nu, grid)?;
    if before <= DISTINCT_FROM_GAUSSIAN {
        return Err(Error::Indistinguishable(before));
    }
    let after = lyapunov_value(&renorm_step(nu)?, grid)?;
    Ok(LyapunovCheck { holds: before - after > LYAPUNOV_MARGIN, before, after })
}

/// `V(T^{n+1} ν) < V(T^n ν)` for `n = 0..steps`.
///
/// Stops early, without error, once an iterate is within [`DISTINCT_FROM_GAUSSIAN`] of γ.
pub fn lyapunov_trajectory(nu: &Measure, steps: u32, grid: &GridSpec) -> Result<Vec<LyapunovCheck>> {
    if steps > MAX_TRAJECTORY {
        return Err(Error::TooManySteps { requested: steps, limit: MAX_TRAJECTORY });
    }
    let mut out = Vec::with_capacity(steps as usize);
    for n in 0..steps {
        match lyapunov_decrease_check(&renorm_power(nu, n)?, grid) {
            Ok(c) => out.push(c),
            Err(Error::Indistinguishable(_)) if n > 0 => break,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Growth factor allowed for the third absolute moment under one step of T.
pub const THIRD_MOMENT_GROWTH: f64 = 16.0 / (2.0 * std::f64::consts::SQRT_2);

/// `E|Tν|³ ≤ (16/2^{3/2}) E|ν|³`, with `Tν` computed by [`renorm_step`].
pub fn third_moment_growth_check(nu: &Measure) -> Result<InequalityCheck> {
    nu.require_q(3.0)?;
    let before = nu.moment(3, true)?;
    let after = renorm_step(nu)?.moment(3, true)?;
    Ok(InequalityCheck::new(after, THIRD_MOMENT_GROWTH * before))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfn::eval_cf;
    use crate::metric::ds_distance_unchecked;

    fn rademacher() -> Measure {
        Measure::atomic([(-1.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    fn skewed() -> Measure {
        Measure::atomic([(2.0, 0.2), (-0.5, 0.8)]).unwrap()
    }

    #[test]
    fn step_of_rademacher_is_three_atoms() {
        let t = renorm_step(&rademacher()).unwrap();
        let atoms: Vec<(f64, f64)> = t.atoms().unwrap().iter().map(|a| (a.position, a.weight)).collect();
        let r2 = 2f64.sqrt();
        assert_eq!(atoms.len(), 3);
        for ((x, w), (ex, ew)) in atoms.iter().zip([(-r2, 0.25), (0.0, 0.5), (r2, 0.25)]) {
            assert!((x - ex).abs() < 1e-15 && (w - ew).abs() < 1e-15);
        }
    }

    #[test]
    fn gaussian_is_fixed() {
        let g = Measure::standard_gaussian();
        let t = renorm_step(&g).unwrap();
        let Repr::Parametric(Family::Gaussian { mean, variance }) = *t.repr() else { panic!() };
        assert_eq!(mean, 0.0);
        assert!((variance - 1.0).abs() < 1e-15);
    }

    #[test]
    fn step_of_skewed_scales_third_moment() {
        let t = renorm_step(&skewed()).unwrap();
        assert_eq!(t.atoms().unwrap().len(), 3);
        assert!((t.moment(3, false).unwrap() - 1.5 * FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((t.variance() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn step_rejects_unstandardized_input() {
        let u = Measure::parametric("uniform", &[0.0, 1.0]).unwrap();
        assert!(matches!(renorm_step(&u), Err(Error::NotInQ { .. })));
    }

    #[test]
    fn non_atomic_steps_go_to_cf_level() {
        let lap = Measure::parametric("laplace", &[0.0, FRAC_1_SQRT_2]).unwrap();
        let t2 = renorm_step(&renorm_step(&lap).unwrap()).unwrap();
        assert!(matches!(t2.repr(), Repr::CfLevel { level: 2, .. }));
    }

    #[test]
    fn atomic_and_cf_level_iterates_agree() {
        let grid = GridSpec::default().points();
        for base in [rademacher(), skewed()] {
            let mut exact = base.clone();
            for n in 1..=6 {
                exact = renorm_step(&exact).unwrap();
                let level = base.cf_level(n).unwrap();
                for &xi in grid.iter().step_by(7) {
                    let diff = (eval_cf(&exact, xi) - eval_cf(&level, xi)).norm();
                    assert!(diff < 1e-10, "n={n} xi={xi} diff={diff}");
                }
            }
        }
    }

    #[test]
    fn gaussian_trajectory_is_flat() {
        let r = renorm_trajectory(&Measure::standard_gaussian(), 5, &GridSpec::default()).unwrap();
        assert!(r.distances_d3.as_ref().unwrap().iter().all(|&d| d == 0.0));
        assert!(r.distances_d2.iter().all(|&d| d == 0.0));
        assert!(r.fitted_slope_log2.is_none());
        assert!(r.lyapunov_monotone);
        assert_eq!(r.csv_rows().len(), 7);
    }

    #[test]
    fn trajectory_limits() {
        let g = GridSpec::default();
        assert!(renorm_trajectory(&rademacher(), 0, &g).is_err());
        assert!(renorm_trajectory(&rademacher(), MAX_TRAJECTORY + 1, &g).is_err());
    }

    #[test]
    fn heavy_tail_trajectory_has_no_d3() {
        let t = Measure::parametric("student-t3", &[0.0, 1.0]).unwrap();
        let r = renorm_trajectory(&t, 4, &GridSpec::default()).unwrap();
        assert!(r.distances_d3.is_none());
        assert!(r.contraction_ratios.iter().all(|x| x.is_nan()));
        assert!(r.lyapunov_monotone);
    }

    #[test]
    fn slope_fit_recovers_exact_geometric_decay() {
        let v: Vec<f64> = (0..12).map(|n| 3.0 * 2f64.powf(-0.5 * n as f64)).collect();
        assert!((fit_log2_slope(&v, 2).unwrap() + 0.5).abs() < 1e-12);
        assert!(fit_log2_slope(&[0.0; 5], 0).is_none());
    }

    #[test]
    fn contraction_examples() {
        let g = GridSpec::default();
        let gamma = Measure::standard_gaussian();
        let c = contraction_ratio(&skewed(), &gamma, &g).unwrap();
        assert!(c.holds && c.ratio <= CONTRACTION_CONSTANT + 1e-12, "{c:?}");
        let c = contraction_ratio(&rademacher(), &gamma, &g).unwrap();
        assert!(c.holds, "{c:?}");
        assert!(matches!(contraction_ratio(&gamma, &gamma, &g), Err(Error::Indistinguishable(_))));
    }

    #[test]
    fn clt_rate_is_equality_at_one() {
        let c = clt_rate_check(&skewed(), 1, &GridSpec::default()).unwrap();
        assert_eq!(c.lhs, c.rhs);
        let c = clt_rate_check(&skewed(), 3, &GridSpec::default()).unwrap();
        assert!(c.holds, "{c:?}");
    }

    #[test]
    fn normalized_sum_of_two_is_one_step() {
        let g = GridSpec::default();
        let a = normalized_sum(&skewed(), 2).unwrap();
        let b = renorm_step(&skewed()).unwrap();
        assert!(ds_distance_unchecked(&a, &b, 3.0, &g).unwrap().value < 1e-10);
    }

    #[test]
    fn third_moment_growth_on_atoms() {
        let c = third_moment_growth_check(&rademacher()).unwrap();
        // E|X+Y|³/2^{3/2} with X, Y Rademacher is 8·½/2^{3/2}
        assert!((c.lhs - 4.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!(c.holds);
        assert!(third_moment_growth_check(&skewed()).unwrap().holds);
    }

    #[test]
    fn lyapunov_along_trajectories() {
        let g = GridSpec::default();
        let checks = lyapunov_trajectory(&skewed(), 10, &g).unwrap();
        assert_eq!(checks.len(), 10);
        assert!(checks.iter().all(|c| c.holds));
        assert!(checks.windows(2).all(|w| (w[1].before - w[0].after).abs() < 1e-15));
        assert!(lyapunov_trajectory(&Measure::standard_gaussian(), 3, &g).is_err());
    }

    #[test]
    fn lyapunov_examples() {
        let g = GridSpec::default();
        assert_eq!(lyapunov_value(&Measure::standard_gaussian(), &g).unwrap(), 0.0);
        assert!(lyapunov_value(&rademacher(), &g).unwrap() > 0.0);
        let c = lyapunov_decrease_check(&rademacher(), &g).unwrap();
        assert!(c.holds && c.after < c.before);
        assert!(lyapunov_decrease_check(&skewed(), &g).unwrap().holds);
        assert!(matches!(
            lyapunov_decrease_check(&Measure::standard_gaussian(), &g),
            Err(Error::Indistinguishable(_))
        ));
    }
}
