use std::fmt::Write as _;

use serde::{Serialize, Serializer};

use super::CliError;
use crate::asymptotics::{capacity_large_nr, capacity_large_nt, low_snr_metrics};
use crate::closedform::capacity_ceiling;
use crate::error::Error;
use crate::model::{db_to_linear, AntennaConfig, ImpairmentConfig};

/// A limit that may not exist (or may be outside the closed-form envelope).
#[derive(Debug, Clone, PartialEq)]
pub enum Bound {
    Finite(f64),
    Unbounded,
    Unavailable(String),
}

impl Bound {
    fn from_result(r: Result<f64, Error>) -> Result<Self, CliError> {
        match r {
            Ok(v) => Ok(Bound::Finite(v)),
            Err(Error::Unbounded(_)) => Ok(Bound::Unbounded),
            Err(e @ Error::UnsupportedConfiguration { .. }) => Ok(Bound::Unavailable(e.to_string())),
            Err(e) => Err(e.into()),
        }
    }
}

impl std::fmt::Display for Bound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bound::Finite(v) => write!(f, "{v}"),
            Bound::Unbounded => f.write_str("unbounded"),
            Bound::Unavailable(why) => write!(f, "unavailable ({why})"),
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Bound::Finite(v) => s.serialize_f64(*v),
            Bound::Unbounded => s.serialize_str("unbounded"),
            Bound::Unavailable(_) => s.serialize_str("unavailable"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub nt: usize,
    pub nr: usize,
    pub delta_t: f64,
    pub delta_r: f64,
    pub snr_db: f64,
    pub eb_n0_min: f64,
    pub eb_n0_min_db: f64,
    pub s0: f64,
    pub c_dot_0: f64,
    pub c_ddot_0: f64,
    pub capacity_ceiling_bits: Bound,
    pub large_nt_limit_bits: f64,
    pub large_nr_limit_bits: Bound,
}

impl MetricsReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "configuration      {}x{} (nr x nt), delta_t = {}, delta_r = {}", self.nr, self.nt, self.delta_t, self.delta_r);
        let _ = writeln!(s, "Eb/N0_min          {} ({} dB)", self.eb_n0_min, self.eb_n0_min_db);
        let _ = writeln!(s, "wideband slope S0  {} bits/s/Hz/(3 dB)", self.s0);
        let _ = writeln!(s, "C'(0), C''(0)      {}, {}", self.c_dot_0, self.c_ddot_0);
        let _ = writeln!(s, "capacity ceiling   {}", self.capacity_ceiling_bits);
        let _ = writeln!(s, "large-nt limit     {} (at {} dB)", self.large_nt_limit_bits, self.snr_db);
        let _ = writeln!(s, "large-nr limit     {}", self.large_nr_limit_bits);
        s
    }
}

pub fn print_metrics(
    ant: &AntennaConfig,
    imp: &ImpairmentConfig,
    snr_db: f64,
) -> Result<MetricsReport, CliError> {
    let low = low_snr_metrics(ant, imp);
    Ok(MetricsReport {
        nt: ant.nt,
        nr: ant.nr,
        delta_t: imp.delta_t,
        delta_r: imp.delta_r,
        snr_db,
        eb_n0_min: low.eb_n0_min,
        eb_n0_min_db: low.eb_n0_min_db(),
        s0: low.s0,
        c_dot_0: low.c_dot_0,
        c_ddot_0: low.c_ddot_0,
        capacity_ceiling_bits: Bound::from_result(capacity_ceiling(ant, imp))?,
        large_nt_limit_bits: capacity_large_nt(db_to_linear(snr_db), ant.nr, imp)?,
        large_nr_limit_bits: Bound::from_result(capacity_large_nr(ant.nt, imp))?,
    })
}
