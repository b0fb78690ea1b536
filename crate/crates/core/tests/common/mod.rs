//! Test-only oracles, deliberately independent of the crate's own
//! quadrature.

#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

/// Tanh-sinh quadrature on `[a, b]`, refining the step until two levels
/// agree to `rel`. Endpoint singularities of log/power type are fine.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    // contribution of the node pair at abscissa parameter t
    let pair = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let cu = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cu * cu);
        // 1 - tanh(u), computed without cancellation
        let gap = 1.0 / (u.exp() * cu);
        if gap * half == 0.0 || w == 0.0 {
            return 0.0;
        }
        let d = half * gap;
        w * (f(a + d) + f(b - d))
    };

    let t_max = 3.5;
    let mut h = 0.5;
    let mut sum = FRAC_PI_2 * f(mid);
    let mut k = 1;
    while k as f64 * h <= t_max {
        sum += pair(k as f64 * h);
        k += 1;
    }
    let mut estimate = half * h * sum;
    for level in 0..8 {
        h *= 0.5;
        // only the new odd nodes
        let mut k = 1;
        while k as f64 * h <= t_max {
            sum += pair(k as f64 * h);
            k += 2;
        }
        let next = half * h * sum;
        let converged = (next - estimate).abs() <= rel * next.abs().max(1e-300);
        estimate = next;
        if level >= 2 && converged {
            break;
        }
    }
    estimate
}

/// `∫_0^{upper} f` split on a doubling grid `[0,1], [1,2], [2,4], …` so that
/// peaked integrands far from the origin are resolved.
pub fn half_line<F: Fn(f64) -> f64>(f: &F, upper: f64, rel: f64) -> f64 {
    let mut total = tanh_sinh(f, 0.0, 1.0_f64.min(upper), rel);
    let mut lo = 1.0;
    while lo < upper {
        let hi = (2.0 * lo).min(upper);
        total += tanh_sinh(f, lo, hi, rel);
        lo = hi;
    }
    total
}

/// Relative error with an absolute floor for values near zero.
pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-300)
}

pub fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}
