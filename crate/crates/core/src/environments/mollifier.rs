//! The C^∞ bump `η₀` and its running integral `η`.
//!
//! `η₀ = 1` on `|x| ≤ 1/4`, `0` on `|x| ≥ 1`, and in between follows the bridge
//! `g(s) = e(1−s) / (e(1−s) + e(s))` with `s = (|x| − 1/4)/(3/4)` and
//! `e(u) = exp(−1/u)`. Because `g(s) + g(1−s) = 1`, each flank integrates to
//! exactly 3/8, so `η(+∞) = 5/4`.

use std::sync::OnceLock;

const INNER: f64 = 0.25;
const WIDTH: f64 = 0.75;
/// `∫ η₀` over the whole line.
pub const ETA_TOTAL: f64 = 1.25;

const TABLE_INTERVALS: usize = 1024;
const SIMPSON_TOL: f64 = 1e-14;

/// Bridge `g(s)` on `[0, 1]`, written as a logistic in `1/(1−s) − 1/s`.
fn bridge(s: f64) -> f64 {
    if s <= 0.0 {
        1.0
    } else if s >= 1.0 {
        0.0
    } else {
        1.0 / (1.0 + (1.0 / (1.0 - s) - 1.0 / s).exp())
    }
}

fn bridge_derivative(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let u = 1.0 / (1.0 - s) - 1.0 / s;
    let g = 1.0 / (1.0 + u.exp());
    let one_minus_g = 1.0 / (1.0 + (-u).exp());
    -g * one_minus_g * (1.0 / ((1.0 - s) * (1.0 - s)) + 1.0 / (s * s))
}

pub fn eta0(x: f64) -> f64 {
    let a = x.abs();
    if a <= INNER {
        1.0
    } else if a >= 1.0 {
        0.0
    } else {
        bridge((a - INNER) / WIDTH)
    }
}

/// `η₀'(x)`, which is also `η''(x)`.
pub fn eta0_derivative(x: f64) -> f64 {
    let a = x.abs();
    if a <= INNER || a >= 1.0 {
        return 0.0;
    }
    x.signum() * bridge_derivative((a - INNER) / WIDTH) / WIDTH
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let m = 0.5 * (a + b);
    (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = simpson(f, a, m);
    let right = simpson(f, m, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, m, left, 0.5 * tol, depth - 1) + adaptive(f, m, b, right, 0.5 * tol, depth - 1)
}

fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    adaptive(f, a, b, simpson(f, a, b), tol, 40)
}

/// Cumulative table of `∫₀^s g` at `s = k / TABLE_INTERVALS`.
fn table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let h = 1.0 / TABLE_INTERVALS as f64;
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(TABLE_INTERVALS + 1);
        out.push(0.0);
        for k in 0..TABLE_INTERVALS {
            acc += integrate(&bridge, k as f64 * h, (k + 1) as f64 * h, SIMPSON_TOL);
            out.push(acc);
        }
        out
    })
}

/// `∫₀^s g(u) du` for `s ∈ [0, 1]`.
fn bridge_integral(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    let t = table();
    let k = ((s * TABLE_INTERVALS as f64).floor() as usize).min(TABLE_INTERVALS - 1);
    let node = k as f64 / TABLE_INTERVALS as f64;
    t[k] + integrate(&bridge, node, s, SIMPSON_TOL)
}

/// `η(x) = ∫_{−∞}^x η₀(u) du`.
pub fn eta(x: f64) -> f64 {
    if x <= -1.0 {
        0.0
    } else if x < -INNER {
        WIDTH * (0.5 - bridge_integral((-x - INNER) / WIDTH))
    } else if x <= INNER {
        3.0 / 8.0 + (x + INNER)
    } else if x < 1.0 {
        7.0 / 8.0 + WIDTH * bridge_integral((x - INNER) / WIDTH)
    } else {
        ETA_TOTAL
    }
}

/// `max |η₀'|`, found by a dense scan of the bridge (cached).
pub fn eta0_derivative_bound() -> f64 {
    static BOUND: OnceLock<f64> = OnceLock::new();
    *BOUND.get_or_init(|| {
        let n = 200_000;
        (1..n)
            .map(|k| bridge_derivative(k as f64 / n as f64).abs())
            .fold(0.0, f64::max)
            / WIDTH
    })
}
