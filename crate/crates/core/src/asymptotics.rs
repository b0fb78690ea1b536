//! Low-SNR metrics, large-array limits and the large-system deterministic
//! equivalent of the impaired capacity.

use std::f64::consts::{LN_2, LOG2_E};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{linear_to_db, AntennaConfig, ImpairmentConfig};

/// First- and second-order behaviour of the capacity at vanishing SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowSnrMetrics {
    /// Minimum energy per bit `Eb/N0_min` (linear).
    pub eb_n0_min: f64,
    /// Wideband slope in bits/s/Hz per 3 dB.
    pub s0: f64,
    /// `dC/dρ` at `ρ = 0`, in bits.
    pub c_dot_0: f64,
    /// `d²C/dρ²` at `ρ = 0`, in bits.
    pub c_ddot_0: f64,
}

impl LowSnrMetrics {
    pub fn eb_n0_min_db(&self) -> f64 {
        linear_to_db(self.eb_n0_min)
    }
}

/// `Eb/N0_min = ln2 / nr` and
/// `S0 = 2 nt nr / ((2δt² + 1)(nt + nr) + 2δr² nt)`.
pub fn low_snr_metrics(ant: &AntennaConfig, imp: &ImpairmentConfig) -> LowSnrMetrics {
    let nt = ant.nt as f64;
    let nr = ant.nr as f64;
    let dt2 = imp.delta_t * imp.delta_t;
    let dr2 = imp.delta_r * imp.delta_r;
    LowSnrMetrics {
        eb_n0_min: LN_2 / nr,
        s0: 2.0 * nt * nr / ((2.0 * dt2 + 1.0) * (nt + nr) + 2.0 * dr2 * nt),
        c_dot_0: nr / LN_2,
        c_ddot_0: -(nr / LN_2) * ((2.0 * dt2 + 1.0) * (nt + nr) / nt + 2.0 * dr2),
    }
}

/// Linear-in-dB capacity approximation near `Eb/N0_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowSnrApprox {
    pub capacity_bits: f64,
    /// Set when `eb_n0 < eb_n0_min`, where the approximation is negative.
    pub below_minimum: bool,
}

/// `C ≈ S0 log2((Eb/N0) / (Eb/N0)_min)`.
pub fn low_snr_capacity_approx(eb_n0: f64, metrics: &LowSnrMetrics) -> Result<LowSnrApprox> {
    if !(eb_n0.is_finite() && eb_n0 > 0.0) {
        return Err(domain("Eb/N0", eb_n0));
    }
    let capacity_bits = metrics.s0 * (eb_n0 / metrics.eb_n0_min).log2();
    Ok(LowSnrApprox {
        capacity_bits,
        below_minimum: eb_n0 < metrics.eb_n0_min,
    })
}

/// Limit for `nt → ∞` at fixed `nr`: `nr log2(1 + ρ / (ρδt² + ρδr² + 1))`.
pub fn capacity_large_nt(rho: f64, nr: usize, imp: &ImpairmentConfig) -> Result<f64> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(domain("linear SNR", rho));
    }
    if nr == 0 {
        return Err(Error::InvalidConfig("nr must be positive".into()));
    }
    let denom = rho * (imp.delta_t * imp.delta_t + imp.delta_r * imp.delta_r) + 1.0;
    Ok(nr as f64 * (rho / denom).ln_1p() / LN_2)
}

/// Limit for `nr → ∞` at fixed `nt`: `nt log2(1 + 1/δt²)`. Does not depend
/// on `δr` or the SNR; an ideal transmitter has no limit.
pub fn capacity_large_nr(nt: usize, imp: &ImpairmentConfig) -> Result<f64> {
    if nt == 0 {
        return Err(Error::InvalidConfig("nt must be positive".into()));
    }
    if imp.delta_t == 0.0 {
        return Err(Error::Unbounded(
            "with an ideal transmitter the capacity grows logarithmically in nr",
        ));
    }
    Ok(nt as f64 * (1.0 / (imp.delta_t * imp.delta_t)).ln_1p() / LN_2)
}

/// Large-system approximation of the capacity at fixed `β = nr / nt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeterministicEquivalent {
    pub rho1: f64,
    pub rho2: f64,
    pub l_param: f64,
    /// `nr` times the per-antenna deterministic expression, in bits. The
    /// true capacity differs from it by `O(1/nt)`.
    pub capacity_approx: f64,
}

// Positive root of r² - (xL - 1/β) r - x/β = 0 together with r / x.
// The ratio stays finite as x → 0, where it tends to 1.
fn fixed_point_root(x: f64, l: f64, beta_inv: f64) -> (f64, f64) {
    if x == 0.0 {
        return (0.0, 1.0);
    }
    let b = x * l - beta_inv;
    let disc = b * b + 4.0 * x * beta_inv;
    let sq = disc.sqrt();
    if b <= 0.0 {
        // r = 2(x/β) / (sq - b) avoids cancellation in b + sq.
        let ratio = 2.0 * beta_inv / (sq - b);
        (ratio * x, ratio)
    } else {
        let r = 0.5 * (b + sq);
        (r, r / x)
    }
}

/// Deterministic equivalent of the impaired capacity.
///
/// The impaired capacity is the difference of two ideal-hardware log-det
/// terms with effective SNRs `x1 = ρ(1+δt²)/(1+ρδr²)` and
/// `x2 = ρδt²/(1+ρδr²)`. Each term is replaced by its large-system limit:
/// `log2(1 + x/(1+βr)) + β⁻¹ log2(1+βr) + log2(e)·r/x`, where `r` solves
/// `r² - (xL - 1/β) r - x/β = 0` and `L = 1 - 1/β`.
pub fn deterministic_equivalent(
    rho: f64,
    ant: &AntennaConfig,
    imp: &ImpairmentConfig,
) -> Result<DeterministicEquivalent> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(domain("linear SNR", rho));
    }
    let beta = ant.beta();
    let beta_inv = ant.nt as f64 / ant.nr as f64;
    let l = ant.l_param();
    let dt2 = imp.delta_t * imp.delta_t;
    let floor = 1.0 + rho * imp.delta_r * imp.delta_r;
    let x1 = rho * (1.0 + dt2) / floor;
    let x2 = rho * dt2 / floor;

    let (rho1, ratio1) = fixed_point_root(x1, l, beta_inv);
    let (rho2, ratio2) = fixed_point_root(x2, l, beta_inv);

    let per_antenna = ((floor + rho * (1.0 + dt2) / (1.0 + beta * rho1))
        / (floor + rho * dt2 / (1.0 + beta * rho2)))
        .log2()
        + beta_inv * ((1.0 + beta * rho1) / (1.0 + beta * rho2)).log2()
        + LOG2_E * (ratio1 - ratio2);
    let capacity_approx = ant.nr as f64 * per_antenna;

    if ![rho1, rho2, capacity_approx].iter().all(|v| v.is_finite()) {
        return Err(Error::NumericalInstability(format!(
            "deterministic equivalent is not finite (rho1 = {rho1}, rho2 = {rho2})"
        )));
    }
    Ok(DeterministicEquivalent {
        rho1,
        rho2,
        l_param: l,
        capacity_approx: capacity_approx.max(0.0),
    })
}
