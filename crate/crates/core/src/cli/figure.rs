//! Datasets behind the standard capacity figures. Reference lines come from
//! the analytical expressions; nothing is read off published plots.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;

use super::grid::{parse_snr_grid, validate_grid};
use super::sweep::{sweep_rows, write_csv_rows};
use super::{CliError, FigureArgs, Method};
use crate::asymptotics::{
    capacity_large_nr, capacity_large_nt, deterministic_equivalent, low_snr_capacity_approx,
    low_snr_metrics,
};
use crate::closedform::capacity_ceiling;
use crate::model::{db_to_linear, linear_to_db, AntennaConfig, ImpairmentConfig};
use crate::montecarlo::{estimate_ergodic_capacity, CapacityEstimate, McOptions, MIN_TRIALS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureId {
    /// Capacity vs SNR, 2x2 and 4x4, ideal and impaired (closed form + MC).
    Fig2,
    /// Low-SNR capacity vs Eb/N0 for 4x4 with the wideband-slope line.
    Fig3,
    /// Capacity vs nt at nr = 4 with the large-nt limit.
    Fig4,
    /// Capacity vs nr at nt = 4 with the large-nr limit.
    Fig5,
    /// Capacity vs nr at fixed beta with the deterministic equivalent.
    Fig6,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureOverrides {
    pub out_dir: PathBuf,
    /// Grid for fig2/fig3; its single entry is the operating point of fig4-fig6.
    pub snr_db: Option<Vec<f64>>,
    pub impaired: ImpairmentConfig,
    pub mc: McOptions,
    /// Antenna counts swept by fig4-fig6 (nt, nr and nr respectively).
    pub sizes: Option<Vec<usize>>,
}

impl FigureOverrides {
    pub fn from_args(args: &FigureArgs) -> Result<Self, CliError> {
        let snr_db = args
            .snr_db
            .as_deref()
            .map(parse_snr_grid)
            .transpose()
            .map_err(CliError::InvalidRequest)?;
        if args.trials < MIN_TRIALS {
            return Err(CliError::InvalidRequest(format!(
                "--trials must be at least {MIN_TRIALS}"
            )));
        }
        Ok(Self {
            out_dir: args.out.clone(),
            snr_db,
            impaired: ImpairmentConfig::new(args.delta_t, args.delta_r)?,
            mc: McOptions::new(args.trials, args.seed),
            sizes: None,
        })
    }

    pub fn new(out_dir: impl Into<PathBuf>, trials: usize, seed: u64) -> Self {
        Self {
            out_dir: out_dir.into(),
            snr_db: None,
            impaired: ImpairmentConfig {
                delta_t: 0.15,
                delta_r: 0.15,
            },
            mc: McOptions::new(trials, seed),
            sizes: None,
        }
    }

    fn grid(&self, default: &str) -> Result<Vec<f64>, CliError> {
        let grid = match &self.snr_db {
            Some(g) => g.clone(),
            None => parse_snr_grid(default).map_err(CliError::InvalidRequest)?,
        };
        validate_grid(&grid).map_err(CliError::InvalidRequest)?;
        Ok(grid)
    }

    fn operating_point(&self) -> Result<f64, CliError> {
        match self.snr_db.as_deref() {
            None => Ok(10.0),
            Some([single]) => Ok(*single),
            Some(_) => Err(CliError::InvalidRequest(
                "fig4-fig6 take a single --snr-db value".into(),
            )),
        }
    }

    fn sizes(&self, default: &[usize]) -> Vec<usize> {
        self.sizes.clone().unwrap_or_else(|| default.to_vec())
    }
}

fn write_file<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| CliError::output(&path, e))?;
    write_csv_rows(BufWriter::new(file), rows).map_err(|e| CliError::output(&path, e))?;
    Ok(path)
}

/// Generate the dataset files of figure `id`, returning their paths.
pub fn reproduce_figure(id: FigureId, o: &FigureOverrides) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(&o.out_dir).map_err(|e| CliError::output(&o.out_dir, e))?;
    match id {
        FigureId::Fig2 => fig2(o),
        FigureId::Fig3 => fig3(o),
        FigureId::Fig4 => fig4(o),
        FigureId::Fig5 => fig5(o),
        FigureId::Fig6 => fig6(o),
    }
}

#[derive(Serialize)]
struct CeilingRow {
    nt: usize,
    nr: usize,
    delta_t: f64,
    delta_r: f64,
    capacity_ceiling_bits: f64,
}

fn fig2(o: &FigureOverrides) -> Result<Vec<PathBuf>, CliError> {
    let grid = o.grid("-10:5:40")?;
    let methods = [Method::ClosedForm, Method::MonteCarlo];
    let mut files = Vec::new();
    let mut ceilings = Vec::new();
    for n in [2usize, 4] {
        let ant = AntennaConfig::new(n, n)?;
        for (tag, imp) in [("ideal", ImpairmentConfig::ideal()), ("impaired", o.impaired)] {
            let rows = sweep_rows(&ant, &imp, &grid, &methods, &o.mc)?;
            files.push(write_file(&o.out_dir, &format!("fig2_{n}x{n}_{tag}.csv"), &rows)?);
            if !imp.is_ideal() {
                ceilings.push(CeilingRow {
                    nt: n,
                    nr: n,
                    delta_t: imp.delta_t,
                    delta_r: imp.delta_r,
                    capacity_ceiling_bits: capacity_ceiling(&ant, &imp)?,
                });
            }
        }
    }
    files.push(write_file(&o.out_dir, "fig2_ceilings.csv", &ceilings)?);
    Ok(files)
}

#[derive(Serialize)]
struct LowSnrRow {
    snr_db: f64,
    rho: f64,
    capacity_bits: f64,
    std_error: f64,
    eb_n0_db: f64,
    linear_approx_bits: f64,
    eb_n0_min_db: f64,
    s0: f64,
    trials: usize,
    seed: u64,
}

fn fig3(o: &FigureOverrides) -> Result<Vec<PathBuf>, CliError> {
    let grid = o.grid("-20:1:10")?;
    let ant = AntennaConfig::new(4, 4)?;
    let mut files = Vec::new();
    for (tag, imp) in [("ideal", ImpairmentConfig::ideal()), ("impaired", o.impaired)] {
        let metrics = low_snr_metrics(&ant, &imp);
        let mut rows = Vec::with_capacity(grid.len());
        for &snr_db in &grid {
            let rho = db_to_linear(snr_db);
            let est = estimate_ergodic_capacity(rho, &ant, &imp, &o.mc)?;
            let eb_n0 = rho / est.mean;
            rows.push(LowSnrRow {
                snr_db,
                rho,
                capacity_bits: est.mean,
                std_error: est.std_error,
                eb_n0_db: linear_to_db(eb_n0),
                linear_approx_bits: low_snr_capacity_approx(eb_n0, &metrics)?.capacity_bits,
                eb_n0_min_db: metrics.eb_n0_min_db(),
                s0: metrics.s0,
                trials: est.trials,
                seed: est.seed,
            });
        }
        files.push(write_file(&o.out_dir, &format!("fig3_4x4_{tag}.csv"), &rows)?);
    }
    Ok(files)
}

#[derive(Serialize)]
struct ScalingRow {
    nt: usize,
    nr: usize,
    snr_db: f64,
    ideal_capacity_bits: f64,
    ideal_std_error: f64,
    impaired_capacity_bits: f64,
    impaired_std_error: f64,
    ideal_limit_bits: Option<f64>,
    impaired_limit_bits: Option<f64>,
    trials: usize,
    seed: u64,
}

fn mc_pair(
    rho: f64,
    ant: &AntennaConfig,
    o: &FigureOverrides,
) -> Result<(CapacityEstimate, CapacityEstimate), CliError> {
    // Same seed for both curves: the two estimates share channel draws.
    let ideal = estimate_ergodic_capacity(rho, ant, &ImpairmentConfig::ideal(), &o.mc)?;
    let impaired = estimate_ergodic_capacity(rho, ant, &o.impaired, &o.mc)?;
    Ok((ideal, impaired))
}

const ANTENNA_LADDER: [usize; 10] = [1, 2, 4, 8, 16, 32, 64, 128, 256, 512];

fn fig4(o: &FigureOverrides) -> Result<Vec<PathBuf>, CliError> {
    let snr_db = o.operating_point()?;
    let rho = db_to_linear(snr_db);
    let nr = 4;
    let ideal_limit = capacity_large_nt(rho, nr, &ImpairmentConfig::ideal())?;
    let impaired_limit = capacity_large_nt(rho, nr, &o.impaired)?;
    let mut rows = Vec::new();
    for nt in o.sizes(&ANTENNA_LADDER) {
        let ant = AntennaConfig::new(nt, nr)?;
        let (ideal, impaired) = mc_pair(rho, &ant, o)?;
        rows.push(ScalingRow {
            nt,
            nr,
            snr_db,
            ideal_capacity_bits: ideal.mean,
            ideal_std_error: ideal.std_error,
            impaired_capacity_bits: impaired.mean,
            impaired_std_error: impaired.std_error,
            ideal_limit_bits: Some(ideal_limit),
            impaired_limit_bits: Some(impaired_limit),
            trials: o.mc.trials,
            seed: o.mc.seed,
        });
    }
    Ok(vec![write_file(&o.out_dir, "fig4_nr4.csv", &rows)?])
}

fn fig5(o: &FigureOverrides) -> Result<Vec<PathBuf>, CliError> {
    let snr_db = o.operating_point()?;
    let rho = db_to_linear(snr_db);
    let nt = 4;
    let impaired_limit = capacity_large_nr(nt, &o.impaired).ok();
    let mut rows = Vec::new();
    for nr in o.sizes(&ANTENNA_LADDER) {
        let ant = AntennaConfig::new(nt, nr)?;
        let (ideal, impaired) = mc_pair(rho, &ant, o)?;
        rows.push(ScalingRow {
            nt,
            nr,
            snr_db,
            ideal_capacity_bits: ideal.mean,
            ideal_std_error: ideal.std_error,
            impaired_capacity_bits: impaired.mean,
            impaired_std_error: impaired.std_error,
            ideal_limit_bits: None,
            impaired_limit_bits: impaired_limit,
            trials: o.mc.trials,
            seed: o.mc.seed,
        });
    }
    Ok(vec![write_file(&o.out_dir, "fig5_nt4.csv", &rows)?])
}

#[derive(Serialize)]
struct FixedRatioRow {
    beta: f64,
    nt: usize,
    nr: usize,
    snr_db: f64,
    ideal_capacity_bits: f64,
    ideal_std_error: f64,
    impaired_capacity_bits: f64,
    impaired_std_error: f64,
    ideal_approx_bits: f64,
    impaired_approx_bits: f64,
    relative_gap_mc: f64,
    relative_gap_approx: f64,
    trials: usize,
    seed: u64,
}

fn fig6(o: &FigureOverrides) -> Result<Vec<PathBuf>, CliError> {
    let snr_db = o.operating_point()?;
    let rho = db_to_linear(snr_db);
    let mut rows = Vec::new();
    // beta = nr / nt as (nr multiplier, nt multiplier)
    for (nr_mult, nt_mult) in [(1usize, 2usize), (1, 1), (2, 1)] {
        for base in o.sizes(&[2, 4, 8, 16, 32]) {
            let ant = AntennaConfig::new(base * nt_mult, base * nr_mult)?;
            let (ideal, impaired) = mc_pair(rho, &ant, o)?;
            let de_ideal = deterministic_equivalent(rho, &ant, &ImpairmentConfig::ideal())?;
            let de_impaired = deterministic_equivalent(rho, &ant, &o.impaired)?;
            rows.push(FixedRatioRow {
                beta: ant.beta(),
                nt: ant.nt,
                nr: ant.nr,
                snr_db,
                ideal_capacity_bits: ideal.mean,
                ideal_std_error: ideal.std_error,
                impaired_capacity_bits: impaired.mean,
                impaired_std_error: impaired.std_error,
                ideal_approx_bits: de_ideal.capacity_approx,
                impaired_approx_bits: de_impaired.capacity_approx,
                relative_gap_mc: (impaired.mean - ideal.mean) / ideal.mean,
                relative_gap_approx: (de_impaired.capacity_approx - de_ideal.capacity_approx)
                    / de_ideal.capacity_approx,
                trials: o.mc.trials,
                seed: o.mc.seed,
            });
        }
    }
    Ok(vec![write_file(&o.out_dir, "fig6_fixed_ratio.csv", &rows)?])
}
