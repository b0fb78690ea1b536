//! Special-function kernels for the closed-form capacity.
//!
//! The exponential integral only ever appears in the scaled form
//! `e^x E_n(x)`; the unscaled factors overflow once `x` exceeds ~700, which
//! happens at low SNR where the closed form evaluates at `x = 1/f`.

use crate::error::{domain, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this argument the power series is used, above it the continued
/// fraction.
pub const SERIES_CROSSOVER: f64 = 1.0;

const MAX_ITER: usize = 10_000;
const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;

/// Natural logarithm of the gamma function for `x > 0`.
pub fn gamma_ln(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(domain("gamma_ln argument", x));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// Upper incomplete gamma `Γ(s, x) = ∫_x^∞ t^{s-1} e^{-t} dt` for `s > 0`, `x >= 0`.
pub fn upper_incomplete_gamma(s: f64, x: f64) -> Result<f64> {
    if !(s.is_finite() && s > 0.0) {
        return Err(domain("incomplete gamma order", s));
    }
    if x.is_nan() || x < 0.0 {
        return Err(domain("incomplete gamma argument", x));
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    let log_gamma = statrs::function::gamma::ln_gamma(s);
    if x == 0.0 {
        return Ok(log_gamma.exp());
    }
    let regularized = statrs::function::gamma::checked_gamma_ur(s, x)
        .map_err(|_| domain("incomplete gamma argument", x))?;
    Ok(regularized * log_gamma.exp())
}

/// Scaled exponential integral `e^x E_n(x)`.
///
/// Accepts `x = +inf` (returns 0) and `x = 0` for `n >= 2` (returns
/// `1/(n-1)`). `E_1` diverges at the origin, so `(1, 0)` is a domain error.
pub fn exp_integral_scaled(n: u32, x: f64) -> Result<f64> {
    if n == 0 {
        return Err(domain("exponential integral order", 0.0));
    }
    if x.is_nan() || x < 0.0 {
        return Err(domain("exponential integral argument", x));
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    if x == 0.0 {
        return if n == 1 {
            Err(domain("exponential integral argument (n = 1)", x))
        } else {
            Ok(1.0 / f64::from(n - 1))
        };
    }
    if x > SERIES_CROSSOVER {
        Ok(continued_fraction(n, x))
    } else {
        Ok(power_series(n, x) * x.exp())
    }
}

// Modified Lentz evaluation of the even form of the continued fraction for
// E_n; the result is already multiplied by e^x.
fn continued_fraction(n: u32, x: f64) -> f64 {
    let nm1 = f64::from(n - 1);
    let mut b = x + f64::from(n);
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        let an = -fi * (nm1 + fi);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

// Unscaled E_n(x) for 0 < x <= SERIES_CROSSOVER.
fn power_series(n: u32, x: f64) -> f64 {
    let nm1 = (n - 1) as usize;
    let mut sum = if nm1 != 0 {
        1.0 / nm1 as f64
    } else {
        -x.ln() - EULER_GAMMA
    };
    let mut fact = 1.0;
    for i in 1..MAX_ITER {
        fact *= -x / i as f64;
        let del = if i != nm1 {
            -fact / (i as f64 - nm1 as f64)
        } else {
            let psi = -EULER_GAMMA + (1..=nm1).map(|k| 1.0 / k as f64).sum::<f64>();
            fact * (-x.ln() + psi)
        };
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum
}

/// `Σ_{j=1}^{len} e^x E_j(x)` for every prefix length `0..=max_order`.
///
/// Entry `k` of the returned vector holds the sum over orders `1..=k`, so
/// entry 0 is zero. With `x = +inf` every entry is zero.
pub(crate) fn scaled_prefix_sums(max_order: u32, x: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(max_order as usize + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for j in 1..=max_order {
        acc += exp_integral_scaled(j, x)?;
        out.push(acc);
    }
    Ok(out)
}

// ln Γ(n+1) - [(n + ½) ln n - n + ½ ln 2π], the Stirling remainder.
fn stirling_error(n: f64) -> f64 {
    if n < 16.0 {
        return statrs::function::gamma::ln_gamma(n + 1.0)
            - (n + 0.5) * n.ln()
            + n
            - 0.5 * (2.0 * std::f64::consts::PI).ln();
    }
    let n2 = n * n;
    (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * n2)) / n2) / n2) / n
}

// x ln(x/m) + m - x without cancellation when x ≈ m.
fn deviance(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let next = s + ej / f64::from(2 * j + 1);
            if next == s {
                break;
            }
            s = next;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// `ln(x^t e^{-x} / t!)`, accurate to a few ulps even when `t` and `x` are
/// in the hundreds and the naive three-term form cancels.
pub(crate) fn ln_poisson_term(t: usize, x: f64) -> f64 {
    if t == 0 {
        return -x;
    }
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    let tf = t as f64;
    -0.5 * (2.0 * std::f64::consts::PI * tf).ln() - stirling_error(tf) - deviance(tf, x)
}

/// `∫_0^∞ ln(1 + a y) y^{n-1} e^{-c y} dy`, evaluated through the identity
/// `Γ(n) c^{-n} Σ_{k=1}^{n} e^{c/a} E_{n+1-k}(c/a)`.
///
/// The incomplete gammas with non-positive order in the textbook form are
/// rewritten via `Γ(1-j, z) = z^{1-j} E_j(z)`, which is where the powers of
/// `a` and `c` cancel down to a single `c^{-n}`.
pub fn log_moment_integral(a: f64, n: u32, c: f64) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(domain("log-moment slope a", a));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(domain("log-moment decay c", c));
    }
    if n == 0 {
        return Err(domain("log-moment order n", 0.0));
    }
    let z = c / a;
    let sums = scaled_prefix_sums(n, z)?;
    let log_prefactor = gamma_ln(f64::from(n))? - f64::from(n) * c.ln();
    Ok(log_prefactor.exp() * sums[n as usize])
}
