//! Moment bookkeeping.
//!
//! Moments are carried as the first four cumulants, which transform linearly under
//! convolution and by powers under scaling, so every derived measure gets exact
//! moments without touching its characteristic function. Odd absolute moments have no
//! such rule; they are exact for atomic and parametric laws and otherwise obtained
//! from the characteristic function by quadrature.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::Measure;
use crate::charfn;
use crate::quad::integrate_log_panels;

/// Tolerance on mean and variance for membership in Q_r.
pub const Q_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Cumulants {
    k: [f64; 4],
    /// Largest `j ≤ 4` with `E|X|^j < ∞`.
    finite_order: u32,
}

impl Cumulants {
    pub(crate) fn new(k: [f64; 4], finite_order: u32) -> Self {
        Cumulants { k, finite_order }
    }

    pub(crate) fn from_central(mean: f64, c2: f64, c3: f64, c4: f64) -> Self {
        Cumulants::new([mean, c2, c3, c4 - 3.0 * c2 * c2], 4)
    }

    pub(crate) fn mean(&self) -> f64 {
        self.k[0]
    }

    pub(crate) fn variance(&self) -> f64 {
        self.k[1]
    }

    pub(crate) fn finite_order(&self) -> u32 {
        self.finite_order
    }

    /// Raw moment `E X^j`, `+∞` as the marker for a moment that does not exist.
    pub(crate) fn raw(&self, j: u32) -> f64 {
        if j > self.finite_order {
            return f64::INFINITY;
        }
        let [k1, k2, k3, k4] = self.k;
        match j {
            0 => 1.0,
            1 => k1,
            2 => k2 + k1 * k1,
            3 => k3 + 3.0 * k2 * k1 + k1 * k1 * k1,
            4 => k4 + 4.0 * k3 * k1 + 3.0 * k2 * k2 + 6.0 * k2 * k1 * k1 + k1.powi(4),
            _ => unreachable!("orders above 4 are rejected upstream"),
        }
    }

    pub(crate) fn affine(&self, shift: f64, scale: f64) -> Self {
        let [k1, k2, k3, k4] = self.k;
        let s2 = scale * scale;
        Cumulants::new([shift + scale * k1, s2 * k2, s2 * scale * k3, s2 * s2 * k4], self.finite_order)
    }

    pub(crate) fn add(&self, other: &Self) -> Self {
        let mut k = self.k;
        for (a, b) in k.iter_mut().zip(other.k) {
            *a += b;
        }
        Cumulants::new(k, self.finite_order.min(other.finite_order))
    }

    pub(crate) fn times(&self, count: u32) -> Self {
        let c = count as f64;
        Cumulants::new(self.k.map(|v| c * v), self.finite_order)
    }

    /// Cumulants of the law of `2^{-n/2}(X_1 + … + X_{2^n})`.
    pub(crate) fn renormalized(&self, level: u32) -> Self {
        let shrink = dyadic_shrink(level);
        let [k1, k2, k3, k4] = self.k;
        let grow = 1.0 / shrink;
        Cumulants::new([k1 * grow, k2, k3 * shrink, k4 * shrink * shrink], self.finite_order)
    }
}

/// `2^{-n/2}`, assembled from exact powers of two and one `1/√2`.
pub(crate) fn dyadic_shrink(level: u32) -> f64 {
    let base = 0.5f64.powi((level / 2) as i32);
    if level % 2 == 1 {
        base * FRAC_1_SQRT_2
    } else {
        base
    }
}

/// Result of testing membership in `Q_r = {E X = 0, E X² = 1, E|X|^r < ∞}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QMembership {
    pub r: f64,
    pub is_member: bool,
    pub mean: f64,
    pub variance: f64,
    /// `E|X|^r`; `+∞` when infinite.
    pub abs_moment_r: f64,
}

impl QMembership {
    pub(crate) fn evaluate(r: f64, mean: f64, variance: f64, abs_moment_r: f64) -> Self {
        let is_member = mean.abs() <= Q_TOLERANCE
            && (variance - 1.0).abs() <= Q_TOLERANCE
            && abs_moment_r.is_finite();
        QMembership { r, is_member, mean, variance, abs_moment_r }
    }
}

const SMALL_T: f64 = 1e-3;

/// `E|X|^k` for `k ∈ {1, 3}` from the characteristic function:
///
/// E|X|   = (2/π)  ∫₀^∞ (1 − Re φ(t)) / t² dt
/// E|X|³  = (12/π) ∫₀^∞ (Re φ(t) − 1 + E X² t²/2) / t⁴ dt
pub(crate) fn abs_moment_by_quadrature(m: &Measure, k: u32) -> f64 {
    let c = m.cumulants();
    if k > c.finite_order() {
        return f64::INFINITY;
    }
    let m2 = c.raw(2);
    let re_psi = |t: f64| charfn::cf_minus_one(m, t).re;
    match k {
        1 => {
            let upper = 1e8;
            let head = 0.5 * m2 * SMALL_T;
            let body = integrate_log_panels(|t| -re_psi(t) / (t * t), SMALL_T, upper, 10);
            (2.0 / PI) * (head + body + 1.0 / upper)
        }
        3 => {
            let m4 = c.raw(4);
            let upper = 1e4;
            let head = if m4.is_finite() { m4 * SMALL_T / 24.0 } else { 0.0 };
            let body = integrate_log_panels(
                |t| (re_psi(t) + 0.5 * m2 * t * t) / t.powi(4),
                SMALL_T,
                upper,
                20,
            );
            let tail = 0.5 * m2 / upper - 1.0 / (3.0 * upper.powi(3));
            (12.0 / PI) * (head + body + tail)
        }
        _ => unreachable!("even absolute moments are raw moments"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_moments_from_cumulants() {
        // exponential(1): raw moments are factorials
        let c = Cumulants::new([1.0, 1.0, 2.0, 6.0], 4);
        assert_eq!(c.raw(1), 1.0);
        assert_eq!(c.raw(2), 2.0);
        assert_eq!(c.raw(3), 6.0);
        assert_eq!(c.raw(4), 24.0);
    }

    #[test]
    fn missing_orders_are_infinite() {
        let c = Cumulants::new([0.0, 1.0, f64::NAN, f64::NAN], 2);
        assert_eq!(c.raw(2), 1.0);
        assert_eq!(c.raw(3), f64::INFINITY);
        assert_eq!(c.raw(4), f64::INFINITY);
    }

    #[test]
    fn renormalization_scales_cumulants() {
        let c = Cumulants::new([0.0, 1.0, 1.5, 0.25], 4).renormalized(2);
        assert_eq!(c.variance(), 1.0);
        assert!((c.raw(3) - 0.75).abs() < 1e-15);
        assert!((c.k[3] - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn dyadic_shrink_matches_powf() {
        for n in 0..40 {
            let want = 2f64.powf(-(n as f64) / 2.0);
            assert!((dyadic_shrink(n) / want - 1.0).abs() < 1e-15);
        }
    }
}
