//! Exact ergodic capacity for i.i.d. Rayleigh fading with residual
//! impairments.
//!
//! The capacity is `q E[log2(1 + sinr(λ))]` over the unordered eigenvalue
//! `λ` of the `q × q` Wishart matrix. Its density is a finite sum
//! `K Σ_{n,m} (-1)^{n+m} det(Ω_{nm}) λ^t e^{-λ}` with `t = n + m + p - q - 2`,
//! and each term integrates against `ln(1 + aλ)` to a finite sum of scaled
//! exponential integrals. [`ergodic_capacity_quadrature`] integrates the
//! same density numerically and serves as the cross-check.

use std::f64::consts::LN_2;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};
use crate::integrate::{integrate, Tolerance};
use crate::model::{
    branch_gains, ceiling_branch_gains, sinr_unchecked, AntennaConfig, BranchGains,
    ImpairmentConfig,
};
use crate::specfun::{ln_poisson_term, scaled_prefix_sums};

/// Largest `q = min(nt, nr)` accepted by the closed-form evaluators.
pub const MAX_Q: usize = 8;

/// Accuracy the density quadrature settles for when the roundoff of the
/// alternating density sum (largest at `q = 8` or `p` in the hundreds) keeps
/// it from reaching its `1e-10` target.
pub const QUADRATURE_FALLBACK_REL: f64 = 1e-7;

/// Negative density values above this bound are treated as roundoff.
pub const PDF_NEGATIVE_GUARD: f64 = 1e-10;

/// One `(n, m)` term of the eigenvalue density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumTerm {
    pub n: usize,
    pub m: usize,
    /// Sign of `(-1)^{n+m} det(Ω)`.
    pub sign: i8,
    /// `ln |det(Ω)|`, including the `q^{-1}` scaling of `Ω`.
    pub log_abs_det: f64,
    /// Power of `λ` carried by this term.
    pub t: usize,
    /// `ln(K |det Ω| t!)`, taken from the exact rational so that the
    /// thousands-sized log-factorials at large `p` never cancel in floating
    /// point.
    pub log_weight: f64,
}

/// Precomputed coefficients of the unordered eigenvalue density of a
/// `q × q` complex Wishart matrix with `p` degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCoefficients {
    pub q: usize,
    pub p: usize,
    /// `ln K` with `K = [Π_{i=1}^q (p-i)! Π_{j=1}^q (q-j)!]^{-1}`.
    pub log_k: f64,
    /// Row-major over `(n, m) ∈ {1..q}²`.
    pub terms: Vec<SpectrumTerm>,
}

fn alpha(i: usize, j: usize, n: usize, m: usize) -> usize {
    if i < n && j < m {
        i + j - 2
    } else if i >= n && j >= m {
        i + j
    } else {
        i + j - 1
    }
}

// Fraction-free Gaussian elimination; exact for integer matrices.
fn bareiss_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let k = a.len();
    if k == 0 {
        return BigInt::one();
    }
    let mut sign = 1;
    let mut prev = BigInt::one();
    for col in 0..k {
        if a[col][col].is_zero() {
            match (col + 1..k).find(|&r| !a[r][col].is_zero()) {
                Some(r) => {
                    a.swap(col, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in col + 1..k {
            for j in col + 1..k {
                let v = &a[i][j] * &a[col][col] - &a[i][col] * &a[col][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[col][col].clone();
    }
    let det = a[k - 1][k - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

// ln(num / den) with a single rounding of the quotient.
fn big_ratio_ln(num: &BigInt, den: &BigInt) -> f64 {
    let shift = num.bits() as i64 - den.bits() as i64 - 64;
    let quotient: BigInt = if shift >= 0 {
        num / (den << shift as u64)
    } else {
        (num << (-shift) as u64) / den
    };
    quotient.to_f64().expect("quotient below 2^66").ln() + shift as f64 * LN_2
}

fn big_ln(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().expect("finite below 2^1000").ln()
    } else {
        let shift = bits - 64;
        let top: BigInt = x >> shift;
        top.to_f64().expect("64-bit mantissa").ln() + shift as f64 * LN_2
    }
}

/// Build the density coefficients for `q = min(nt, nr)`, `p = max(nt, nr)`.
///
/// Each `Ω_{nm}` is the `(q-1) × (q-1)` matrix `(α_{ij} + p - q)! q^{-1/(q-1)}`;
/// its determinant is computed exactly over the integers and stored as sign
/// and log-magnitude. For `q = 1` the empty determinant is 1 and no `q`
/// scaling applies.
pub fn build_spectrum_coefficients(ant: &AntennaConfig) -> Result<SpectrumCoefficients> {
    let (q, p) = (ant.q(), ant.p());
    if q > MAX_Q {
        return Err(Error::UnsupportedConfiguration { q, max: MAX_Q });
    }

    let mut factorials = vec![BigInt::one()];
    for k in 1..=(p + q) {
        let next = &factorials[k - 1] * BigInt::from(k);
        factorials.push(next);
    }

    let k_denominator = (1..=q)
        .map(|i| &factorials[p - i])
        .chain((1..=q).map(|j| &factorials[q - j]))
        .fold(BigInt::one(), |acc, f| acc * f);
    let log_k = -big_ln(&k_denominator);
    let weight_denominator = if q > 1 {
        &k_denominator * BigInt::from(q)
    } else {
        k_denominator
    };

    let dim = q - 1;
    let log_scale = if q > 1 { -(q as f64).ln() } else { 0.0 };
    let mut terms = Vec::with_capacity(q * q);
    for n in 1..=q {
        for m in 1..=q {
            let omega: Vec<Vec<BigInt>> = (1..=dim)
                .map(|i| {
                    (1..=dim)
                        .map(|j| factorials[alpha(i, j, n, m) + p - q].clone())
                        .collect()
                })
                .collect();
            let det = bareiss_determinant(omega);
            let parity: i8 = if (n + m) % 2 == 0 { 1 } else { -1 };
            let t = n + m + p - q - 2;
            let (sign, log_abs_det, log_weight) = if det.is_zero() {
                (0, f64::NEG_INFINITY, f64::NEG_INFINITY)
            } else {
                let s: i8 = if det.is_negative() { -1 } else { 1 };
                let magnitude = det.abs();
                let log_weight = big_ratio_ln(&(&magnitude * &factorials[t]), &weight_denominator);
                (s * parity, big_ln(&magnitude) + log_scale, log_weight)
            };
            terms.push(SpectrumTerm {
                n,
                m,
                sign,
                log_abs_det,
                t,
                log_weight,
            });
        }
    }
    Ok(SpectrumCoefficients { q, p, log_k, terms })
}

/// Neumaier-compensated summation.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl SpectrumCoefficients {
    /// Largest power of `λ` among the terms.
    pub fn max_power(&self) -> usize {
        self.p + self.q - 2
    }

    // Unguarded density: may be a tiny negative number from cancellation.
    fn density_raw(&self, lambda: f64) -> f64 {
        let mut acc = CompensatedSum::default();
        for term in &self.terms {
            if term.sign == 0 {
                continue;
            }
            let v = (term.log_weight + ln_poisson_term(term.t, lambda)).exp();
            acc.add(f64::from(term.sign) * v);
        }
        acc.value()
    }

    /// Capacity in bits of the branch pair `log(1 + fλ) - log(1 + gλ)`.
    pub fn capacity_from_gains(&self, gains: BranchGains) -> Result<f64> {
        let top = self.max_power() as u32 + 1;
        let inv = |a: f64| if a > 0.0 { 1.0 / a } else { f64::INFINITY };
        let sums_f = scaled_prefix_sums(top, inv(gains.f))?;
        let sums_g = scaled_prefix_sums(top, inv(gains.g))?;

        let mut acc = CompensatedSum::default();
        for term in &self.terms {
            if term.sign == 0 {
                continue;
            }
            let weight = term.log_weight.exp();
            let branch = sums_f[term.t + 1] - sums_g[term.t + 1];
            acc.add(f64::from(term.sign) * weight * branch);
        }
        let bits = self.q as f64 / LN_2 * acc.value();
        if !bits.is_finite() {
            return Err(Error::NumericalInstability(format!(
                "closed-form sum is not finite (q = {}, p = {}, f = {}, g = {})",
                self.q, self.p, gains.f, gains.g
            )));
        }
        if bits < 0.0 {
            if bits > -1e-12 {
                return Ok(0.0);
            }
            return Err(Error::NumericalInstability(format!(
                "closed-form sum is negative ({bits}) for q = {}, p = {}",
                self.q, self.p
            )));
        }
        Ok(bits)
    }
}

/// Unordered eigenvalue density at `lambda`.
pub fn eigen_pdf(lambda: f64, coef: &SpectrumCoefficients) -> Result<f64> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(domain("eigenvalue", lambda));
    }
    let v = coef.density_raw(lambda);
    if v >= 0.0 {
        Ok(v)
    } else if v > -PDF_NEGATIVE_GUARD {
        Ok(0.0)
    } else {
        Err(Error::NumericalInstability(format!(
            "eigenvalue density is {v} at λ = {lambda} (q = {}, p = {})",
            coef.q, coef.p
        )))
    }
}

/// Exact ergodic capacity in bits per channel use.
pub fn ergodic_capacity_closed(
    rho: f64,
    ant: &AntennaConfig,
    imp: &ImpairmentConfig,
) -> Result<f64> {
    let coef = build_spectrum_coefficients(ant)?;
    coef.capacity_from_gains(branch_gains(rho, ant, imp)?)
}

/// High-SNR capacity ceiling in bits per channel use.
///
/// With `delta_r = 0` every eigenmode saturates at SINR `1/δt²`, giving
/// `q log2(1 + 1/δt²)`. Ideal hardware has no ceiling.
pub fn capacity_ceiling(ant: &AntennaConfig, imp: &ImpairmentConfig) -> Result<f64> {
    if imp.is_ideal() {
        return Err(Error::Unbounded("ideal hardware has no high-SNR ceiling"));
    }
    if imp.delta_r == 0.0 {
        let dt2 = imp.delta_t * imp.delta_t;
        return Ok(ant.q() as f64 * (1.0 / dt2).ln_1p() / LN_2);
    }
    let coef = build_spectrum_coefficients(ant)?;
    coef.capacity_from_gains(ceiling_branch_gains(ant, imp)?)
}

/// Breakpoints for integrating against the density: geometric near the
/// origin (where `ln(1 + fλ)` bends sharply at high SNR), doubling up to a
/// cutoff past which `λ^{p+q-2} e^{-λ}` is negligible.
fn density_breakpoints(coef: &SpectrumCoefficients) -> Vec<f64> {
    let cutoff = 2.0 * (coef.p + coef.q) as f64 + 60.0;
    let mut points = vec![0.0];
    let mut x = 1e-8;
    while x < 1.0 {
        points.push(x);
        x *= 10.0;
    }
    x = 1.0;
    while x < cutoff {
        points.push(x);
        x *= 2.0;
    }
    points.push(cutoff);
    points
}

/// Integrate `weight(λ) · p(λ)` over `[0, ∞)`.
pub fn integrate_against_pdf<F: Fn(f64) -> f64>(
    coef: &SpectrumCoefficients,
    weight: F,
) -> Result<f64> {
    let breakpoints = density_breakpoints(coef);
    integrate(
        |lambda| weight(lambda) * coef.density_raw(lambda).max(0.0),
        &breakpoints,
        Tolerance {
            abs: 1e-300,
            rel: 1e-10,
            max_segments: 4000,
            fallback_rel: QUADRATURE_FALLBACK_REL,
        },
    )
}

/// Ergodic capacity as `q ∫ log2(1 + sinr(λ)) p(λ) dλ`, by adaptive
/// Gauss–Kronrod quadrature over the eigenvalue density.
pub fn ergodic_capacity_quadrature(
    rho: f64,
    ant: &AntennaConfig,
    imp: &ImpairmentConfig,
) -> Result<f64> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(domain("linear SNR", rho));
    }
    let coef = build_spectrum_coefficients(ant)?;
    let nt = ant.nt as f64;
    let nats = integrate_against_pdf(&coef, |lambda| {
        sinr_unchecked(lambda, rho, nt, imp).ln_1p()
    })?;
    Ok(coef.q as f64 * nats / LN_2)
}
