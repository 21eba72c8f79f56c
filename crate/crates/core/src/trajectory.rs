//! Trajectory log formats.
//!
//! CSV: one header row, then one row per control step with columns
//! `step,t,x,y,theta,rho,alpha,beta,rho_m,alpha_m,beta_m,v,omega,regime,V,dV`.
//! Floats carry 9 significant digits in scientific notation, angles are in
//! radians and `v`/`omega` are the body-frame command.
//!
//! JSON: the full [`EpisodeResult`], exact to the last bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulation::{EpisodeResult, StepRecord};
use crate::types::Regime;

pub const CSV_HEADER: &str = "step,t,x,y,theta,rho,alpha,beta,rho_m,alpha_m,beta_m,v,omega,regime,V,dV";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidConfig(format!("unknown format `{other}`"))),
        }
    }
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Flat view of one CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub step: usize,
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    pub rho_m: f64,
    pub alpha_m: f64,
    pub beta_m: f64,
    pub v: f64,
    pub omega: f64,
    pub regime: Regime,
    #[serde(rename = "V")]
    pub lyapunov: f64,
    #[serde(rename = "dV")]
    pub delta_v: f64,
}

impl From<&StepRecord> for TrajectoryRow {
    fn from(r: &StepRecord) -> Self {
        Self {
            step: r.step,
            t: r.t,
            x: r.pose.x,
            y: r.pose.y,
            theta: r.pose.theta,
            rho: r.nav.rho,
            alpha: r.nav.alpha,
            beta: r.nav.beta,
            rho_m: r.meas.rho_m,
            alpha_m: r.meas.alpha_m,
            beta_m: r.meas.beta_m,
            v: r.command.v,
            omega: r.command.omega,
            regime: r.regime,
            lyapunov: r.lyapunov,
            delta_v: r.delta_v,
        }
    }
}

/// Nine significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn write_csv<W: Write>(result: &EpisodeResult, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for rec in &result.trajectory {
        let row = TrajectoryRow::from(rec);
        let floats = [
            row.t,
            row.x,
            row.y,
            row.theta,
            row.rho,
            row.alpha,
            row.beta,
            row.rho_m,
            row.alpha_m,
            row.beta_m,
            row.v,
            row.omega,
        ];
        write!(out, "{}", row.step)?;
        for f in floats {
            write!(out, ",{}", fmt_float(f))?;
        }
        writeln!(
            out,
            ",{},{},{}",
            row.regime,
            fmt_float(row.lyapunov),
            fmt_float(row.delta_v)
        )?;
    }
    out.flush()
}

pub fn to_csv_string(result: &EpisodeResult) -> String {
    let mut buf = Vec::new();
    write_csv(result, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn to_json_string(result: &EpisodeResult) -> Result<String> {
    serde_json::to_string_pretty(result).map_err(|e| Error::Format(e.to_string()))
}

pub fn from_json_str(text: &str) -> Result<EpisodeResult> {
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

/// Writes `result` to `path` in `format`.
pub fn emit_trajectory(result: &EpisodeResult, format: Format, path: &Path) -> Result<()> {
    let io_err = |source| Error::Io {
        context: format!("writing {}", path.display()),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut out = BufWriter::new(file);
    match format {
        Format::Csv => write_csv(result, &mut out).map_err(io_err),
        Format::Json => {
            let text = to_json_string(result)?;
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(io_err)
        }
    }
}

pub fn read_json(path: &Path) -> Result<EpisodeResult> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        context: format!("reading {}", path.display()),
        source,
    })?;
    from_json_str(&text)
}
