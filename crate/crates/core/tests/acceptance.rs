//! Acceptance gate. Runs every criterion in sequence (so the runtime budgets
//! are measured without contention), prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

mod common;

use std::f64::consts::LN_2;
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

use common::{half_line, rel_err, tanh_sinh};
use mimo_capacity::asymptotics::{
    capacity_large_nr, capacity_large_nt, deterministic_equivalent, low_snr_metrics,
};
use mimo_capacity::closedform::{
    build_spectrum_coefficients, capacity_ceiling, eigen_pdf, ergodic_capacity_closed,
    ergodic_capacity_quadrature, SpectrumCoefficients, MAX_Q,
};
use mimo_capacity::model::{db_to_linear, linear_to_db, AntennaConfig, ImpairmentConfig};
use mimo_capacity::montecarlo::{
    estimate_ergodic_capacity, estimate_with, mutual_information, sample_channel, shard_rng,
    CapacityEstimate, McOptions,
};
use mimo_capacity::specfun::exp_integral_scaled;
use rand::Rng;
use rayon::prelude::*;

const SEED: u64 = 42;

// thresholds
const C1_QUAD_REL: f64 = 1e-6;
const C1_MC_SE: f64 = 3.0;
const C1_TRIALS: usize = 100_000;
const C1_BUDGET_S: f64 = 120.0;
const C2_TARGET: f64 = 2.9063;
const C2_TOL: f64 = 1e-3;
const C3_REL: f64 = 1e-3;
const C4_H: f64 = 1e-4;
const C4_FIRST_REL: f64 = 0.01;
const C4_SECOND_REL: f64 = 0.05;
const C4_DB: f64 = -7.612;
const C5_REL: f64 = 1e-12;
const LARGE_TRIALS: usize = 10_000;
const LARGE_REL: f64 = 0.01;
const C6_BUDGET_S: f64 = 60.0;
const C8_RATIO: f64 = 4.0;
const C9_REL: f64 = 1e-6;
const C9_SAMPLES: usize = 1_000_000;
const C9_BINS: usize = 50;
const C9_SIGMAS: f64 = 3.0;
const C10_RECURRENCE_ABS: f64 = 1e-9;
const C10_ORACLE_ABS: f64 = 1e-10;
const C11_DRAWS: usize = 10_000;
const C11_COVARIANCES: usize = 20;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn cfg(nt: usize, nr: usize) -> AntennaConfig {
    AntennaConfig::new(nt, nr).unwrap()
}

fn imp(dt: f64, dr: f64) -> ImpairmentConfig {
    ImpairmentConfig::new(dt, dr).unwrap()
}

fn mc(rho: f64, ant: &AntennaConfig, im: &ImpairmentConfig, trials: usize) -> CapacityEstimate {
    estimate_ergodic_capacity(rho, ant, im, &McOptions::new(trials, SEED)).unwrap()
}

fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    let steps = ((b - a) * per_decade as f64).round() as usize;
    (0..=steps)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / steps as f64))
        .collect()
}

fn three_way_agreement() -> Verdict {
    let start = Instant::now();
    let mut worst_rel = 0.0f64;
    let mut worst_z = 0.0f64;
    let mut misses = Vec::new();
    for (nt, nr) in [(2, 2), (4, 4), (2, 4), (4, 2)] {
        let ant = cfg(nt, nr);
        for (dt, dr) in [(0.0, 0.0), (0.15, 0.15), (0.1, 0.05)] {
            let im = imp(dt, dr);
            for db in [-10.0, 0.0, 10.0, 20.0, 30.0] {
                let rho = db_to_linear(db);
                let closed = ergodic_capacity_closed(rho, &ant, &im).unwrap();
                let quad = ergodic_capacity_quadrature(rho, &ant, &im).unwrap();
                let est = mc(rho, &ant, &im, C1_TRIALS);
                let rel = rel_err(quad, closed);
                let z = (closed - est.mean).abs() / est.std_error;
                worst_rel = worst_rel.max(rel);
                worst_z = worst_z.max(z);
                if rel > C1_QUAD_REL || z > C1_MC_SE {
                    misses.push(format!("{nt}x{nr} δ=({dt},{dr}) {db} dB"));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        misses.is_empty() && secs <= C1_BUDGET_S,
        format!(
            "60 points: max |closed-quad|/closed {worst_rel:.1e} (<= {C1_QUAD_REL:.0e}), \
             max |closed-MC|/SE {worst_z:.2} (<= {C1_MC_SE}), {secs:.1} s (<= {C1_BUDGET_S} s){}",
            if misses.is_empty() { String::new() } else { format!("; misses: {}", misses.join(", ")) }
        ),
    )
}

fn siso_anchor() -> Verdict {
    let oracle = half_line(&|x: f64| (10.0 * x).ln_1p() * (-x).exp(), 120.0, 1e-14) / LN_2;
    let closed = ergodic_capacity_closed(10.0, &cfg(1, 1), &ImpairmentConfig::ideal()).unwrap();
    verdict(
        (closed - oracle).abs() <= C2_TOL && (closed - C2_TARGET).abs() <= C2_TOL,
        format!("closed {closed:.10}, oracle {oracle:.10}, target {C2_TARGET} ± {C2_TOL:.0e}"),
    )
}

fn ceiling() -> Verdict {
    let ant = cfg(4, 4);
    let im = imp(0.15, 0.15);
    let ceiling = capacity_ceiling(&ant, &im).unwrap();
    let high = ergodic_capacity_closed(1e8, &ant, &im).unwrap();
    let rel = (ceiling - high) / ceiling;
    let sweep: Vec<f64> = (-10..=80)
        .map(|db| ergodic_capacity_closed(db_to_linear(db as f64), &ant, &im).unwrap())
        .collect();
    let above = sweep.iter().filter(|&&c| c > ceiling).count();
    verdict(
        rel.abs() <= C3_REL && above == 0,
        format!(
            "C(1e8) {high:.6} vs ceiling {ceiling:.6}: rel gap {rel:.2e} (<= {C3_REL:.0e}); \
             {above} of {} sweep points above the ceiling",
            sweep.len()
        ),
    )
}

fn low_snr() -> Verdict {
    let ant = cfg(4, 4);
    let mut ok = true;
    let mut parts = Vec::new();
    for im in [ImpairmentConfig::ideal(), imp(0.15, 0.15)] {
        let m = low_snr_metrics(&ant, &im);
        let c = |r: f64| ergodic_capacity_quadrature(r, &ant, &im).unwrap();
        // one-sided second-order differences through C(0) = 0
        let (c1, c2) = (c(C4_H), c(2.0 * C4_H));
        let d1 = (4.0 * c1 - c2) / (2.0 * C4_H);
        let d2 = (c2 - 2.0 * c1) / (C4_H * C4_H);
        let (e1, e2) = (rel_err(d1, m.c_dot_0), rel_err(d2, m.c_ddot_0));
        ok &= e1 <= C4_FIRST_REL && e2 <= C4_SECOND_REL && m.c_dot_0 == 4.0 / LN_2;
        parts.push(format!("δ={}: ċ err {e1:.1e}, c̈ err {e2:.1e}", im.delta_t));
    }
    let reference = low_snr_metrics(&ant, &ImpairmentConfig::ideal()).eb_n0_min;
    let mut identical = reference == LN_2 / 4.0;
    for nt in [1, 4, 16] {
        for d in [0.0, 0.05, 0.1, 0.15, 0.3] {
            for (dt, dr) in [(d, 0.0), (0.0, d), (d, d)] {
                let v = low_snr_metrics(&cfg(nt, 4), &imp(dt, dr)).eb_n0_min;
                identical &= v.to_bits() == reference.to_bits();
            }
        }
    }
    let db = linear_to_db(reference);
    ok &= identical && (db - C4_DB).abs() < 5e-4;
    verdict(
        ok,
        format!(
            "{} (<= {C4_FIRST_REL}, {C4_SECOND_REL}); Eb/N0_min {db:.4} dB, bit-identical: {identical}",
            parts.join("; ")
        ),
    )
}

fn wideband_slope() -> Verdict {
    let ideal = low_snr_metrics(&cfg(4, 4), &ImpairmentConfig::ideal()).s0;
    let impaired = low_snr_metrics(&cfg(4, 4), &imp(0.15, 0.15)).s0;
    let rel = rel_err(impaired, 32.0 / 8.54);
    verdict(
        ideal == 4.0 && rel <= C5_REL,
        format!("S0 ideal {ideal}, impaired {impaired:.15} vs 32/8.54 rel {rel:.1e} (<= {C5_REL:.0e})"),
    )
}

fn within_limit(est: &CapacityEstimate, limit: f64) -> (bool, f64) {
    let tol = (3.0 * est.std_error).max(LARGE_REL * limit);
    ((est.mean - limit).abs() <= tol, tol)
}

fn large_nt() -> Verdict {
    let start = Instant::now();
    let im = imp(0.15, 0.15);
    let limit = capacity_large_nt(10.0, 4, &im).unwrap();
    let est = mc(10.0, &cfg(512, 4), &im, LARGE_TRIALS);
    let secs = start.elapsed().as_secs_f64();
    let (ok, tol) = within_limit(&est, limit);
    verdict(
        ok && secs <= C6_BUDGET_S,
        format!(
            "MC {:.5} ± {:.5} vs limit {limit:.5}: |diff| {:.5} (<= {tol:.5}), {secs:.1} s (<= {C6_BUDGET_S} s)",
            est.mean,
            est.std_error,
            (est.mean - limit).abs()
        ),
    )
}

fn large_nr() -> Verdict {
    let both = imp(0.15, 0.15);
    let tx_only = imp(0.15, 0.0);
    let limit = capacity_large_nr(4, &both).unwrap();
    let formula_unchanged = capacity_large_nr(4, &tx_only).unwrap().to_bits() == limit.to_bits();
    let run = |nr: usize, im: &ImpairmentConfig| mc(10.0, &cfg(4, nr), im, LARGE_TRIALS);
    let (b512, t512) = (run(512, &both), run(512, &tx_only));
    let (b256, t256) = (run(256, &both), run(256, &tx_only));
    let (close, tol) = within_limit(&b512, limit);
    let ordered = b512.mean <= t512.mean && b256.mean <= t256.mean;
    let shrinking = (limit - b512.mean).abs() < (limit - b256.mean).abs()
        && (limit - t512.mean).abs() < (limit - t256.mean).abs();
    verdict(
        close && formula_unchanged && ordered && shrinking,
        format!(
            "MC(512) {:.5} ± {:.5} vs limit {limit:.5}: |diff| {:.5} (<= {tol:.5}); \
             limit unchanged at δr=0: {formula_unchanged}; MC δr=0.15 <= δr=0 \
             ({:.5} <= {:.5}, {:.5} <= {:.5}): {ordered}; gap shrinks 256→512: {shrinking}",
            b512.mean,
            b512.std_error,
            (b512.mean - limit).abs(),
            b512.mean,
            t512.mean,
            b256.mean,
            t256.mean
        ),
    )
}

fn deterministic_equivalent_trend() -> Verdict {
    let im = imp(0.15, 0.15);
    let mut errors = Vec::new();
    let mut parts = Vec::new();
    for n in [8, 16, 32, 64] {
        let ant = cfg(n, n);
        let est = mc(10.0, &ant, &im, LARGE_TRIALS);
        let de = deterministic_equivalent(10.0, &ant, &im).unwrap().capacity_approx;
        let err = (est.mean - de).abs();
        errors.push(err);
        parts.push(format!("{n}: {err:.4} (SE {:.4})", est.std_error));
    }
    let decreasing = errors.windows(2).all(|w| w[1] < w[0]);
    let ratio_ok = errors[3] < errors[0] / C8_RATIO;
    verdict(
        decreasing && ratio_ok,
        format!(
            "|MC - DE| at Nt={} ; strictly decreasing: {decreasing}; err(64) < err(8)/{C8_RATIO}: {ratio_ok}",
            parts.join(", ")
        ),
    )
}

fn pdf_moment(coef: &SpectrumCoefficients, k: i32) -> f64 {
    let f = |x: f64| x.powi(k) * eigen_pdf(x, coef).unwrap();
    half_line(&f, 4.0 * (coef.p + coef.q) as f64 + 80.0, 1e-12)
}

// Largest per-bin deviation, in binomial standard deviations, of a histogram
// of independent unordered eigenvalues (one uniformly chosen per draw).
fn histogram_max_z(nt: usize, nr: usize) -> f64 {
    let ant = cfg(nt, nr);
    let coef = build_spectrum_coefficients(&ant).unwrap();
    let (p, q) = (ant.p() as f64, ant.q());
    let width = 1.5 * (p.sqrt() + (q as f64).sqrt()).powi(2) / C9_BINS as f64;
    let probs: Vec<f64> = (0..C9_BINS)
        .map(|k| {
            let f = |x: f64| eigen_pdf(x, &coef).unwrap();
            tanh_sinh(&f, k as f64 * width, (k + 1) as f64 * width, 1e-12)
        })
        .collect();

    let shards = 64;
    let counts = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = shard_rng(SEED, 1000 + s);
            let mut counts = vec![0u64; C9_BINS];
            for _ in 0..C9_SAMPLES / shards {
                let eig = sample_channel(&ant, &mut rng).gram_eigenvalues().unwrap();
                let bin = (eig[rng.random_range(0..q)] / width) as usize;
                if bin < C9_BINS {
                    counts[bin] += 1;
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; C9_BINS],
            |a, b| a.iter().zip(&b).map(|(x, y)| x + y).collect(),
        );
    let n = (C9_SAMPLES / shards * shards) as f64;
    counts
        .iter()
        .zip(&probs)
        .map(|(&c, &pr)| (c as f64 - n * pr).abs() / (n * pr * (1.0 - pr)).sqrt())
        .fold(0.0, f64::max)
}

fn wishart_pdf() -> Verdict {
    let mut worst = 0.0f64;
    for q in 1..=MAX_Q {
        for p in q..=12 {
            let coef = build_spectrum_coefficients(&cfg(q, p)).unwrap();
            let (qf, pf) = (q as f64, p as f64);
            worst = worst
                .max((pdf_moment(&coef, 0) - 1.0).abs())
                .max(rel_err(qf * pdf_moment(&coef, 1), qf * pf))
                .max(rel_err(qf * pdf_moment(&coef, 2), qf * pf * (qf + pf)));
        }
    }
    let zs: Vec<(String, f64)> = [(2, 2), (4, 4), (2, 6)]
        .iter()
        .map(|&(nt, nr)| (format!("{nt}x{nr}"), histogram_max_z(nt, nr)))
        .collect();
    let hist_ok = zs.iter().all(|(_, z)| *z <= C9_SIGMAS);
    verdict(
        worst <= C9_REL && hist_ok,
        format!(
            "worst mass/moment error over q<=8, p<=12: {worst:.1e} (<= {C9_REL:.0e}); \
             max per-bin |z| over {C9_BINS} bins: {} (<= {C9_SIGMAS})",
            zs.iter().map(|(k, z)| format!("{k} {z:.2}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn special_functions() -> Verdict {
    let mut recurrence = 0.0f64;
    for x in log_grid(1e-6, 1e6, 4) {
        for n in 1..=30u32 {
            let lhs = exp_integral_scaled(n + 1, x).unwrap();
            let rhs = (1.0 - x * exp_integral_scaled(n, x).unwrap()) / n as f64;
            recurrence = recurrence.max((lhs - rhs).abs());
        }
    }
    let slack = 8.0 * f64::EPSILON;
    let mut bracket_misses = 0;
    for x in log_grid(1e-8, 1e12, 3) {
        for n in 1..=40u32 {
            let v = exp_integral_scaled(n, x).unwrap();
            let (lo, hi) = (1.0 / (x + n as f64), 1.0 / (x + n as f64 - 1.0));
            if v < lo * (1.0 - slack) || v > hi * (1.0 + slack) {
                bracket_misses += 1;
            }
        }
    }
    let mut oracle = 0.0f64;
    for x in log_grid(0.05, 50.0, 8) {
        for n in [1u32, 2, 3, 7, 15] {
            let f = |s: f64| (-x * s).exp() * (1.0 + s).powi(-(n as i32));
            let want = half_line(&f, 90.0 / x, 1e-13);
            oracle = oracle.max((exp_integral_scaled(n, x).unwrap() - want).abs());
        }
    }
    // positive at finite arguments; the +inf limit is exactly 0
    let stable = [1e-8, 1e-2, 1.0, 1e3, 1e12, f64::INFINITY].iter().all(|&x| {
        (1..=40u32).all(|n| {
            let v = exp_integral_scaled(n, x).unwrap();
            if x.is_finite() { v.is_finite() && v > 0.0 } else { v == 0.0 }
        })
    });
    verdict(
        recurrence <= C10_RECURRENCE_ABS && bracket_misses == 0 && oracle <= C10_ORACLE_ABS && stable,
        format!(
            "recurrence max err {recurrence:.1e} (<= {C10_RECURRENCE_ABS:.0e}), bracketing misses {bracket_misses}, \
             oracle max err {oracle:.1e} (<= {C10_ORACLE_ABS:.0e}), stable at extremes: {stable}"
        ),
    )
}

fn isotropic_optimality() -> Verdict {
    let ant = cfg(2, 2);
    let im = imp(0.15, 0.15);
    let rho = 10.0;
    let opts = McOptions::new(C11_DRAWS, SEED);
    let mut rng = shard_rng(SEED, 9999);
    let mut worst = f64::INFINITY;
    for _ in 0..C11_COVARIANCES {
        let w: f64 = rng.random();
        let q = [rho * w, rho * (1.0 - w)];
        // paired differences on the same draws
        let diff = estimate_with(&ant, &opts, |h| {
            Ok(mutual_information(h, &[rho / 2.0; 2], &im)? - mutual_information(h, &q, &im)?)
        })
        .unwrap();
        worst = worst.min(diff.mean / diff.std_error);
    }
    verdict(
        worst >= -3.0,
        format!("min over {C11_COVARIANCES} diagonal Q of mean(I_iso - I_Q)/SE: {worst:.2} (>= -3)"),
    )
}

fn reproducibility() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let exe = env!("CARGO_BIN_EXE_mimo-capacity");
    let sweep = || {
        Command::new(exe)
            .args(["sweep", "--method", "all", "--snr-db", "-10:10:30", "--trials", "2000",
                "--delta-t", "0.15", "--delta-r", "0.15"])
            .output()
            .unwrap()
    };
    let (a, b) = (sweep(), sweep());
    let figure = |name: &str| {
        let out = dir.path().join(name);
        let run = Command::new(exe)
            .args(["figure", "fig2", "--snr-db", "0:10:20", "--trials", "500", "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert!(run.status.success());
        let mut files: Vec<_> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files
            .iter()
            .map(|p| (p.file_name().unwrap().to_owned(), std::fs::read(p).unwrap()))
            .collect::<Vec<_>>()
    };
    let (fa, fb) = (figure("a"), figure("b"));
    let sweep_same = a.status.success() && !a.stdout.is_empty() && a.stdout == b.stdout;
    let figure_same = !fa.is_empty() && fa == fb;
    verdict(
        sweep_same && figure_same,
        format!(
            "sweep stdout identical: {sweep_same} ({} bytes); fig2 datasets identical: {figure_same} ({} files)",
            a.stdout.len(),
            fa.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("closed form, quadrature and Monte-Carlo agree", three_way_agreement),
        ("SISO ideal anchor", siso_anchor),
        ("high-SNR ceiling", ceiling),
        ("low-SNR derivatives and minimum Eb/N0", low_snr),
        ("wideband slope values", wideband_slope),
        ("large-Nt limit", large_nt),
        ("large-Nr limit", large_nr),
        ("deterministic-equivalent error trend", deterministic_equivalent_trend),
        ("eigenvalue density", wishart_pdf),
        ("special functions", special_functions),
        ("isotropic input optimality", isotropic_optimality),
        ("reproducible CLI output", reproducibility),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|_| verdict(false, "panicked".into()));
        if !v.pass {
            failed += 1;
        }
        println!(
            "{} [{:>2}] {name}: {} [{:.1} s]",
            if v.pass { "PASS" } else { "FAIL" },
            k + 1,
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
