//! Composite Gauss–Legendre quadrature on log-spaced panels.

use std::f64::consts::PI;
use std::sync::OnceLock;

const ORDER: usize = 20;

fn nodes() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| legendre_nodes(ORDER))
}

/// Nodes and weights on [-1, 1] by Newton iteration on P_n.
fn legendre_nodes(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// ∫_a^b f over panels whose edges are log-spaced, `per_decade` panels per decade.
pub fn integrate_log_panels<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, per_decade: usize) -> f64 {
    debug_assert!(a > 0.0 && b > a);
    let decades = (b / a).log10();
    let panels = ((decades * per_decade as f64).ceil() as usize).max(1);
    let ratio = (b / a).powf(1.0 / panels as f64);
    let mut total = 0.0;
    let mut lo = a;
    for p in 0..panels {
        let hi = if p + 1 == panels { b } else { lo * ratio };
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        let mut acc = 0.0;
        for &(x, w) in nodes() {
            acc += w * f(mid + half * x);
        }
        total += half * acc;
        lo = hi;
    }
    total
}
