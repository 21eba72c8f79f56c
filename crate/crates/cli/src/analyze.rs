//! Lyapunov trace report from a trajectory CSV.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use polarstab::{wrap_angle, Regime, TrajectoryRow};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeTrace {
    pub regime: Regime,
    pub steps: usize,
    pub first_step: usize,
    pub v_start: f64,
    pub v_end: f64,
    /// Steps whose logged change is positive.
    pub increases: usize,
    pub max_increase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceReport {
    pub steps: usize,
    pub duration: f64,
    pub switch_step: Option<usize>,
    pub max_abs_v: f64,
    pub final_rho: f64,
    pub final_theta: f64,
    pub regimes: Vec<RegimeTrace>,
}

pub fn read_rows(path: &Path) -> Result<Vec<TrajectoryRow>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    reader
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.with_context(|| format!("{}: malformed row {}", path.display(), i + 1)))
        .collect()
}

pub fn analyze(rows: &[TrajectoryRow]) -> Result<TraceReport> {
    let Some(last) = rows.last() else {
        bail!("trajectory has no rows");
    };
    let mut regimes: Vec<RegimeTrace> = Vec::new();
    for r in rows {
        let after = r.lyapunov + r.delta_v;
        match regimes.iter_mut().find(|t| t.regime == r.regime) {
            Some(t) => {
                t.steps += 1;
                t.v_end = after;
                if r.delta_v > 0.0 {
                    t.increases += 1;
                    t.max_increase = t.max_increase.max(r.delta_v);
                }
            }
            None => regimes.push(RegimeTrace {
                regime: r.regime,
                steps: 1,
                first_step: r.step,
                v_start: r.lyapunov,
                v_end: after,
                increases: usize::from(r.delta_v > 0.0),
                max_increase: r.delta_v.max(0.0),
            }),
        }
    }
    Ok(TraceReport {
        steps: rows.len(),
        duration: last.t,
        switch_step: rows.iter().find(|r| r.regime == Regime::Local).map(|r| r.step),
        max_abs_v: rows.iter().map(|r| r.v.abs()).fold(0.0, f64::max),
        final_rho: last.rho,
        final_theta: wrap_angle(last.beta - last.alpha).map_or(f64::NAN, f64::abs),
        regimes,
    })
}

impl TraceReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "steps {}  duration {:.2} s  max |v| {:.4} m/s",
            self.steps, self.duration, self.max_abs_v
        );
        let _ = match self.switch_step {
            Some(s) => writeln!(out, "switched to LOCAL at step {s}"),
            None => writeln!(out, "never switched to LOCAL"),
        };
        let _ = writeln!(
            out,
            "last logged state: rho {:.4e} m, |theta| {:.4e} rad",
            self.final_rho, self.final_theta
        );
        for t in &self.regimes {
            let _ = writeln!(
                out,
                "{:<6} {:>6} steps from {:>5}: V {:.4e} -> {:.4e}, {} increases (max {:.3e})",
                t.regime.as_str(),
                t.steps,
                t.first_step,
                t.v_start,
                t.v_end,
                t.increases,
                t.max_increase
            );
        }
        out
    }
}
