//! Monte-Carlo oracle for the ergodic capacity.
//!
//! Channels are i.i.d. `CN(0, 1)` matrices. Trials are split into a fixed
//! number of shards; shard `k` draws from the ChaCha stream `k` of the
//! user seed, and shard statistics are merged in shard order. An estimate is
//! therefore a pure function of `(seed, trials, shards)`, whatever the
//! number of worker threads.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

use nalgebra::{Cholesky, DMatrix};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{sinr_unchecked, AntennaConfig, ImpairmentConfig};

/// Eigenvalues of the Gram matrix below this value are reported as solver
/// failures; values in `[EIGEN_NEGATIVE_GUARD, 0)` are clamped to zero.
pub const EIGEN_NEGATIVE_GUARD: f64 = -1e-9;

pub const DEFAULT_SHARDS: usize = 64;
pub const MIN_TRIALS: usize = 100;

/// One `nr × nt` channel matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub entries: DMatrix<Complex64>,
}

impl ChannelRealization {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::InvalidConfig("empty channel matrix".into()));
        }
        Ok(Self { entries })
    }

    pub fn antennas(&self) -> AntennaConfig {
        AntennaConfig {
            nt: self.entries.ncols(),
            nr: self.entries.nrows(),
        }
    }

    /// The `q × q` Gram matrix: `H Hᴴ` when `nr <= nt`, `Hᴴ H` otherwise.
    pub fn gram(&self) -> DMatrix<Complex64> {
        let h = &self.entries;
        if h.nrows() <= h.ncols() {
            h * h.adjoint()
        } else {
            h.adjoint() * h
        }
    }

    /// Eigenvalues of [`Self::gram`], ascending.
    pub fn gram_eigenvalues(&self) -> Result<Vec<f64>> {
        let w = self.gram();
        let raw = w.symmetric_eigenvalues();
        let mut values: Vec<f64> = raw.iter().copied().collect();
        let diagnostics = || {
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            format!(
                "eigenvalues in [{min:e}, {max:e}], condition ~ {:e}, Frobenius norm {:e}, size {}",
                max.abs() / min.abs(),
                w.norm(),
                w.nrows()
            )
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::EigenDecomposition(diagnostics()));
        }
        if values.iter().any(|&v| v < EIGEN_NEGATIVE_GUARD) {
            return Err(Error::EigenDecomposition(format!(
                "Gram matrix is not positive semi-definite: {}",
                diagnostics()
            )));
        }
        for v in values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        values.sort_by(f64::total_cmp);
        Ok(values)
    }
}

/// Draw an `nr × nt` matrix with i.i.d. `CN(0, 1)` entries.
pub fn sample_channel<R: Rng + ?Sized>(ant: &AntennaConfig, rng: &mut R) -> ChannelRealization {
    let entries = DMatrix::from_fn(ant.nr, ant.nt, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
    });
    ChannelRealization { entries }
}

/// `log2 det(I + H Q Hᴴ Φ⁻¹)` with `Φ = δt² H Q Hᴴ + (δr² tr(Q) + 1) I`
/// for a diagonal input covariance `Q = diag(q_diag)`.
pub fn mutual_information(
    h: &ChannelRealization,
    q_diag: &[f64],
    imp: &ImpairmentConfig,
) -> Result<f64> {
    let nt = h.entries.ncols();
    if q_diag.len() != nt {
        return Err(Error::InvalidConfig(format!(
            "covariance has {} diagonal entries for {} transmit antennas",
            q_diag.len(),
            nt
        )));
    }
    if let Some(&bad) = q_diag.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(domain("covariance diagonal entry", bad));
    }
    let trace: f64 = q_diag.iter().sum();

    let mut hq = h.entries.clone();
    for (j, &qj) in q_diag.iter().enumerate() {
        hq.column_mut(j).scale_mut(qj);
    }
    let signal = hq * h.entries.adjoint();
    let nr = signal.nrows();
    let noise_floor = imp.delta_r * imp.delta_r * trace + 1.0;
    let phi = &signal * Complex64::from(imp.delta_t * imp.delta_t)
        + DMatrix::<Complex64>::identity(nr, nr) * Complex64::from(noise_floor);
    let total = &phi + &signal;

    let ln_det = |m: DMatrix<Complex64>, what: &str| -> Result<f64> {
        Cholesky::new(m)
            .map(|c| c.ln_determinant())
            .ok_or_else(|| Error::NumericalInstability(format!("{what} is not positive definite")))
    };
    let bits = (ln_det(total, "Φ + H Q Hᴴ")? - ln_det(phi, "Φ")?) / LN_2;
    Ok(bits.max(0.0))
}

/// Capacity of one realization with isotropic input:
/// `Σ_i log2(1 + sinr(λ_i))` over the Gram eigenvalues.
pub fn capacity_realization(
    h: &ChannelRealization,
    rho: f64,
    imp: &ImpairmentConfig,
) -> Result<f64> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(domain("linear SNR", rho));
    }
    let nt = h.entries.ncols() as f64;
    let nats: f64 = h
        .gram_eigenvalues()?
        .into_iter()
        .map(|lambda| sinr_unchecked(lambda, rho, nt, imp).ln_1p())
        .sum();
    Ok(nats / LN_2)
}

/// Trial budget and stream layout of a Monte-Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McOptions {
    pub trials: usize,
    pub seed: u64,
    pub shards: usize,
}

impl McOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            shards: DEFAULT_SHARDS,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(Error::InvalidConfig(format!(
                "at least {MIN_TRIALS} Monte-Carlo trials are required (got {})",
                self.trials
            )));
        }
        if self.shards == 0 {
            return Err(Error::InvalidConfig("shard count must be positive".into()));
        }
        Ok(())
    }

    /// Trials assigned to each shard; the first `trials % shards` shards
    /// take one extra.
    pub fn shard_sizes(&self) -> Vec<usize> {
        let shards = self.shards.min(self.trials).max(1);
        let base = self.trials / shards;
        let extra = self.trials % shards;
        (0..shards).map(|k| base + usize::from(k < extra)).collect()
    }
}

/// Random stream for shard `shard` of `seed`.
pub fn shard_rng(seed: u64, shard: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard as u64);
    rng
}

/// Monte-Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct RunningStats {
    count: usize,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if other.count == 0 {
            return self;
        }
        if self.count == 0 {
            return other;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2
            + other.m2
            + delta * delta * (self.count as f64 * other.count as f64) / count as f64;
        Self { count, mean, m2 }
    }
}

/// Average `statistic` over `opts.trials` channel draws.
pub fn estimate_with<F>(ant: &AntennaConfig, opts: &McOptions, statistic: F) -> Result<CapacityEstimate>
where
    F: Fn(&ChannelRealization) -> Result<f64> + Sync,
{
    opts.validate()?;
    let shards: Vec<Result<RunningStats>> = opts
        .shard_sizes()
        .into_par_iter()
        .enumerate()
        .map(|(k, size)| {
            let mut rng = shard_rng(opts.seed, k);
            let mut stats = RunningStats::default();
            for _ in 0..size {
                let h = sample_channel(ant, &mut rng);
                stats.push(statistic(&h)?);
            }
            Ok(stats)
        })
        .collect();

    let mut total = RunningStats::default();
    for shard in shards {
        total = total.merge(shard?);
    }
    let variance = if total.count > 1 {
        total.m2 / (total.count - 1) as f64
    } else {
        0.0
    };
    Ok(CapacityEstimate {
        mean: total.mean,
        std_error: (variance / total.count as f64).sqrt(),
        trials: total.count,
        seed: opts.seed,
    })
}

/// Monte-Carlo ergodic capacity with isotropic input `(rho / nt) I`.
pub fn estimate_ergodic_capacity(
    rho: f64,
    ant: &AntennaConfig,
    imp: &ImpairmentConfig,
    opts: &McOptions,
) -> Result<CapacityEstimate> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(domain("linear SNR", rho));
    }
    estimate_with(ant, opts, |h| capacity_realization(h, rho, imp))
}
