//! Antenna geometry, impairment levels, SNR handling and the per-eigenmode
//! effective SINR of the impaired channel.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Residual distortion levels of the transmitter (`delta_t`) and receiver
/// (`delta_r`) hardware. Both are held constant over SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpairmentConfig {
    pub delta_t: f64,
    pub delta_r: f64,
}

impl ImpairmentConfig {
    pub fn new(delta_t: f64, delta_r: f64) -> Result<Self> {
        if !(delta_t.is_finite() && delta_t >= 0.0) {
            return Err(domain("delta_t", delta_t));
        }
        if !(delta_r.is_finite() && delta_r >= 0.0) {
            return Err(domain("delta_r", delta_r));
        }
        Ok(Self { delta_t, delta_r })
    }

    /// Ideal transceivers.
    pub const fn ideal() -> Self {
        Self {
            delta_t: 0.0,
            delta_r: 0.0,
        }
    }

    pub fn is_ideal(&self) -> bool {
        self.delta_t == 0.0 && self.delta_r == 0.0
    }
}

/// Numbers of transmit and receive antennas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AntennaConfig {
    pub nt: usize,
    pub nr: usize,
}

impl AntennaConfig {
    pub fn new(nt: usize, nr: usize) -> Result<Self> {
        if nt == 0 || nr == 0 {
            return Err(Error::InvalidConfig(format!(
                "antenna counts must be positive (nt = {nt}, nr = {nr})"
            )));
        }
        Ok(Self { nt, nr })
    }

    /// `min(nt, nr)`: the number of eigenmodes.
    pub fn q(&self) -> usize {
        self.nt.min(self.nr)
    }

    /// `max(nt, nr)`.
    pub fn p(&self) -> usize {
        self.nt.max(self.nr)
    }

    /// `nr / nt` as an exact integer ratio `(numerator, denominator)`.
    pub fn beta_ratio(&self) -> (usize, usize) {
        (self.nr, self.nt)
    }

    /// `nr / nt`.
    pub fn beta(&self) -> f64 {
        self.nr as f64 / self.nt as f64
    }

    /// `1 - 1/beta = (nr - nt) / nr`, computed from the integers so that
    /// equal-ratio configurations give bit-identical values.
    pub fn l_param(&self) -> f64 {
        (self.nr as f64 - self.nt as f64) / self.nr as f64
    }
}

/// Linear SNR (signal power with unit noise power).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct SnrSpec {
    rho: f64,
}

impl SnrSpec {
    pub fn from_linear(rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(domain("linear SNR", rho));
        }
        Ok(Self { rho })
    }

    pub fn from_db(db: f64) -> Result<Self> {
        if !db.is_finite() {
            return Err(domain("SNR in dB", db));
        }
        Self::from_linear(db_to_linear(db))
    }

    pub fn linear(&self) -> f64 {
        self.rho
    }

    pub fn db(&self) -> f64 {
        linear_to_db(self.rho)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Transmitter EVM. Under the proportional distortion model this is `delta_t`.
pub fn evm_of(cfg: &ImpairmentConfig) -> f64 {
    cfg.delta_t
}

/// SINR of one eigenmode with eigenvalue `lambda` of the Gram matrix under
/// isotropic input `(rho / nt) I`:
/// `(rho λ / nt) / (rho δt² λ / nt + rho δr² + 1)`.
pub fn effective_sinr(
    lambda: f64,
    rho: f64,
    ant: &AntennaConfig,
    imp: &ImpairmentConfig,
) -> Result<f64> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(domain("eigenvalue", lambda));
    }
    if rho.is_nan() || rho < 0.0 {
        return Err(domain("linear SNR", rho));
    }
    Ok(sinr_unchecked(lambda, rho, ant.nt as f64, imp))
}

#[inline]
pub(crate) fn sinr_unchecked(lambda: f64, rho: f64, nt: f64, imp: &ImpairmentConfig) -> f64 {
    let signal = rho * lambda / nt;
    signal / (signal * imp.delta_t * imp.delta_t + rho * imp.delta_r * imp.delta_r + 1.0)
}

/// Gains of the two logarithmic branches of the capacity integrand:
/// `log(1 + sinr(λ)) = log(1 + f λ) - log(1 + g λ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchGains {
    pub f: f64,
    pub g: f64,
}

/// `f = ρ(δt²+1) / (nt(ρδr²+1))`, `g = ρδt² / (nt(ρδr²+1))`.
pub fn branch_gains(rho: f64, ant: &AntennaConfig, imp: &ImpairmentConfig) -> Result<BranchGains> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(domain("linear SNR", rho));
    }
    let dt2 = imp.delta_t * imp.delta_t;
    let denom = ant.nt as f64 * (rho * imp.delta_r * imp.delta_r + 1.0);
    Ok(BranchGains {
        f: rho * (dt2 + 1.0) / denom,
        g: rho * dt2 / denom,
    })
}

/// High-SNR limits of [`branch_gains`]:
/// `f̂ = (1+δt²) / (nt δr²)`, `ĝ = δt² / (nt δr²)`. Requires `delta_r > 0`.
pub fn ceiling_branch_gains(ant: &AntennaConfig, imp: &ImpairmentConfig) -> Result<BranchGains> {
    if imp.delta_r <= 0.0 {
        return Err(domain("delta_r (must be > 0 for the ceiling gains)", imp.delta_r));
    }
    let dt2 = imp.delta_t * imp.delta_t;
    let denom = ant.nt as f64 * imp.delta_r * imp.delta_r;
    Ok(BranchGains {
        f: (1.0 + dt2) / denom,
        g: dt2 / denom,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ant(nt: usize, nr: usize) -> AntennaConfig {
        AntennaConfig::new(nt, nr).unwrap()
    }

    #[test]
    fn evm_equals_delta_t() {
        assert_eq!(evm_of(&ImpairmentConfig::new(0.15, 0.1).unwrap()), 0.15);
        assert_eq!(evm_of(&ImpairmentConfig::ideal()), 0.0);
        assert_eq!(evm_of(&ImpairmentConfig::new(0.08, 0.0).unwrap()), 0.08);
    }

    #[test]
    fn config_validation() {
        assert!(ImpairmentConfig::new(-0.1, 0.0).is_err());
        assert!(ImpairmentConfig::new(0.1, f64::NAN).is_err());
        assert!(AntennaConfig::new(0, 2).is_err());
        let a = ant(4, 2);
        assert_eq!((a.q(), a.p()), (2, 4));
        assert_eq!(a.beta(), 0.5);
        assert_eq!(a.l_param(), -1.0);
        assert_eq!(ant(4, 4).l_param(), ant(64, 64).l_param());
        assert!(SnrSpec::from_linear(0.0).is_err());
    }

    #[test]
    fn sinr_examples() {
        let ideal = ImpairmentConfig::ideal();
        assert_eq!(effective_sinr(1.0, 10.0, &ant(1, 1), &ideal).unwrap(), 10.0);
        let imp = ImpairmentConfig::new(0.15, 0.15).unwrap();
        let s = effective_sinr(2.0, 10.0, &ant(4, 4), &imp).unwrap();
        assert!((s - 5.0 / 1.3375).abs() < 1e-12);
        let tx_only = ImpairmentConfig::new(0.15, 0.0).unwrap();
        let s = effective_sinr(3.0, 1e12, &ant(2, 2), &tx_only).unwrap();
        assert!((s - 1.0 / 0.0225).abs() < 1e-6);
        assert!(effective_sinr(-1.0, 1.0, &ant(1, 1), &ideal).is_err());
    }

    #[test]
    fn branch_gain_examples() {
        let imp = ImpairmentConfig::new(0.15, 0.15).unwrap();
        let gains = branch_gains(10.0, &ant(4, 4), &imp).unwrap();
        assert!((gains.f - 10.0 * 1.0225 / (4.0 * 1.225)).abs() < 1e-14);
        assert!((gains.g - 10.0 * 0.0225 / (4.0 * 1.225)).abs() < 1e-14);
        let ideal = branch_gains(10.0, &ant(4, 2), &ImpairmentConfig::ideal()).unwrap();
        assert_eq!((ideal.f, ideal.g), (2.5, 0.0));
        let hat = ceiling_branch_gains(&ant(4, 4), &imp).unwrap();
        let far = branch_gains(1e14, &ant(4, 4), &imp).unwrap();
        assert!((far.f - hat.f).abs() < 1e-9 * hat.f);
        assert!((far.g - hat.g).abs() < 1e-9 * hat.g);
        assert!(ceiling_branch_gains(&ant(4, 4), &ImpairmentConfig::new(0.1, 0.0).unwrap()).is_err());
    }

    #[test]
    fn db_round_trip() {
        let s = SnrSpec::from_db(10.0).unwrap();
        assert!((s.linear() - 10.0).abs() < 1e-12);
        assert!((SnrSpec::from_linear(0.5).unwrap().db() - 10.0 * 0.5f64.log10()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn db_round_trip_prop(db in -60.0f64..80.0) {
            let back = SnrSpec::from_db(db).unwrap().db();
            prop_assert!((back - db).abs() <= 1e-12 * db.abs().max(1.0));
        }

        #[test]
        fn sinr_monotone(
            lambda in 0.0f64..50.0,
            dl in 0.0f64..5.0,
            rho in 1e-3f64..1e4,
            dt in 0.0f64..0.5,
            dr in 0.0f64..0.5,
            bump in 1e-3f64..0.1,
        ) {
            let a = ant(3, 5);
            let imp = ImpairmentConfig::new(dt, dr).unwrap();
            let base = effective_sinr(lambda, rho, &a, &imp).unwrap();
            prop_assert!(effective_sinr(lambda + dl, rho, &a, &imp).unwrap() >= base);
            prop_assert!(effective_sinr(lambda, rho * 1.5, &a, &imp).unwrap() >= base);
            let worse_t = ImpairmentConfig::new(dt + bump, dr).unwrap();
            let worse_r = ImpairmentConfig::new(dt, dr + bump).unwrap();
            prop_assert!(effective_sinr(lambda, rho, &a, &worse_t).unwrap() <= base);
            prop_assert!(effective_sinr(lambda, rho, &a, &worse_r).unwrap() <= base);
            if dt > 0.0 {
                prop_assert!(base < 1.0 / (dt * dt));
            }
        }

        #[test]
        fn gains_split_the_log(
            lambda in 0.0f64..100.0,
            rho in 1e-3f64..1e5,
            dt in 0.0f64..0.5,
            dr in 0.0f64..0.5,
            nt in 1usize..10,
        ) {
            let a = ant(nt, 4);
            let imp = ImpairmentConfig::new(dt, dr).unwrap();
            let gains = branch_gains(rho, &a, &imp).unwrap();
            let gap = gains.f - gains.g;
            let expected = rho / (nt as f64 * (rho * dr * dr + 1.0));
            prop_assert!((gap - expected).abs() <= 1e-12 * expected);
            prop_assert!(gains.f > gains.g && gains.g >= 0.0);
            prop_assert_eq!(gains.g == 0.0, dt == 0.0);

            let sinr = effective_sinr(lambda, rho, &a, &imp).unwrap();
            let lhs = (1.0 + sinr).log2();
            let c = rho * dr * dr + 1.0;
            let rhs = (rho * (1.0 + dt * dt) * lambda / nt as f64 + c).log2()
                - (rho * dt * dt * lambda / nt as f64 + c).log2();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }
}
