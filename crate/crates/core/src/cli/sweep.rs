use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::grid::{parse_snr_grid, validate_grid};
use super::{CliError, Method, OutputFormat, SweepArgs};
use crate::closedform::{build_spectrum_coefficients, ergodic_capacity_closed, ergodic_capacity_quadrature};
use crate::model::{db_to_linear, AntennaConfig, ImpairmentConfig};
use crate::montecarlo::{estimate_ergodic_capacity, McOptions, DEFAULT_SHARDS, MIN_TRIALS};

/// A fully resolved sweep, echoed into JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRequest {
    pub ant: AntennaConfig,
    pub imp: ImpairmentConfig,
    pub snr_grid: Vec<f64>,
    pub method: Method,
    pub trials: usize,
    pub seed: u64,
    pub shards: usize,
    pub output_format: OutputFormat,
    pub output_path: String,
}

impl SweepRequest {
    pub fn from_args(args: &SweepArgs) -> Result<Self, CliError> {
        let (ant, imp) = args.system.configs()?;
        let snr_grid = parse_snr_grid(&args.snr_db).map_err(CliError::InvalidRequest)?;
        let request = Self {
            ant,
            imp,
            snr_grid,
            method: args.method,
            trials: args.trials,
            seed: args.seed,
            shards: DEFAULT_SHARDS,
            output_format: args.format,
            output_path: args.out.clone(),
        };
        request.validate()?;
        Ok(request)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        validate_grid(&self.snr_grid).map_err(CliError::InvalidRequest)?;
        let methods = self.method.expand();
        if methods.contains(&Method::MonteCarlo) && self.trials < MIN_TRIALS {
            return Err(CliError::InvalidRequest(format!(
                "--trials must be at least {MIN_TRIALS} for Monte-Carlo"
            )));
        }
        if methods
            .iter()
            .any(|m| matches!(m, Method::ClosedForm | Method::Quadrature))
        {
            // fails fast with the envelope error before any work is done
            build_spectrum_coefficients(&self.ant)?;
        }
        Ok(())
    }

    pub fn mc_options(&self) -> McOptions {
        McOptions {
            trials: self.trials,
            seed: self.seed,
            shards: self.shards,
        }
    }
}

/// One `(snr, method)` result. Monte-Carlo-only columns are empty elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub snr_db: f64,
    pub rho: f64,
    pub nt: usize,
    pub nr: usize,
    pub delta_t: f64,
    pub delta_r: f64,
    pub method: String,
    pub capacity_bits: f64,
    pub std_error: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
}

/// JSON document written by `sweep --format json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub request: SweepRequest,
    pub rows: Vec<SweepRow>,
}

pub(crate) fn sweep_rows(
    ant: &AntennaConfig,
    imp: &ImpairmentConfig,
    grid: &[f64],
    methods: &[Method],
    mc: &McOptions,
) -> Result<Vec<SweepRow>, CliError> {
    let mut rows = Vec::with_capacity(grid.len() * methods.len());
    for &snr_db in grid {
        let rho = db_to_linear(snr_db);
        for &method in methods {
            let (capacity_bits, std_error, trials, seed) = match method {
                Method::ClosedForm => (ergodic_capacity_closed(rho, ant, imp)?, None, None, None),
                Method::Quadrature => (ergodic_capacity_quadrature(rho, ant, imp)?, None, None, None),
                Method::MonteCarlo => {
                    let est = estimate_ergodic_capacity(rho, ant, imp, mc)?;
                    (est.mean, Some(est.std_error), Some(est.trials), Some(est.seed))
                }
                Method::All => unreachable!("expanded by the caller"),
            };
            rows.push(SweepRow {
                snr_db,
                rho,
                nt: ant.nt,
                nr: ant.nr,
                delta_t: imp.delta_t,
                delta_r: imp.delta_r,
                method: method.label().to_string(),
                capacity_bits,
                std_error,
                trials,
                seed,
            });
        }
    }
    Ok(rows)
}

/// Evaluate every `(snr, method)` pair of the request, SNR-major.
pub fn run_sweep(req: &SweepRequest) -> Result<Vec<SweepRow>, CliError> {
    req.validate()?;
    sweep_rows(&req.ant, &req.imp, &req.snr_grid, &req.method.expand(), &req.mc_options())
}

pub(crate) fn write_csv_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> io::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row).map_err(io::Error::other)?;
    }
    writer.flush()
}

pub fn write_sweep<W: Write>(out: &mut W, req: &SweepRequest, rows: &[SweepRow]) -> io::Result<()> {
    match req.output_format {
        OutputFormat::Csv => write_csv_rows(out, rows),
        OutputFormat::Json => {
            let doc = SweepOutput {
                request: req.clone(),
                rows: rows.to_vec(),
            };
            serde_json::to_writer_pretty(&mut *out, &doc)?;
            out.write_all(b"\n")
        }
    }
}
