//! Files written next to each experiment's results.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use polarstab::{MonteCarloSummary, Stats};

use crate::config::ExperimentSpec;

pub const PLOT_SCRIPT: &str = include_str!("../scripts/plot.py");

pub const SUMMARY_JSON: &str = "summary.json";
pub const SUMMARY_TXT: &str = "summary.txt";
pub const RESOLVED_SPEC: &str = "resolved.toml";
pub const PLOT_FILE: &str = "plot.py";

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Human-readable summary table.
pub fn format_summary(name: &str, s: &MonteCarloSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "experiment {name} ({} law, master seed {})", s.law, s.master_seed);
    let _ = writeln!(out, "  runs            {}", s.runs);
    let _ = writeln!(out, "  success rate    {:.3}", s.success_rate);
    let _ = writeln!(out, "  converged rate  {:.3}", s.converged_rate);
    let _ = writeln!(out, "  aborted         {}", s.aborted);
    let _ = writeln!(
        out,
        "  {:<16}{:>12}{:>12}{:>12}{:>12}",
        "final error", "mean", "median", "max", "std"
    );
    let mut row = |label: &str, stats: &Option<Stats>| {
        let _ = match stats {
            Some(st) => writeln!(
                out,
                "  {label:<16}{:>12.4e}{:>12.4e}{:>12.4e}{:>12.4e}",
                st.mean, st.median, st.max, st.std
            ),
            None => writeln!(out, "  {label:<16}{:>12}", "n/a"),
        };
    };
    row("position [m]", &s.final_rho);
    row("|theta| [rad]", &s.final_theta);
    out
}

/// Writes the summary as JSON and as a text table, returning the table.
pub fn emit_summary(name: &str, summary: &MonteCarloSummary, dir: &Path) -> Result<String> {
    let json = serde_json::to_string_pretty(summary).context("serializing summary")?;
    write(dir.join(SUMMARY_JSON), &json)?;
    let text = format_summary(name, summary);
    write(dir.join(SUMMARY_TXT), &text)?;
    Ok(text)
}

/// Writes the fully resolved spec so the experiment can be re-run from its outputs.
pub fn write_resolved(spec: &ExperimentSpec, dir: &Path) -> Result<PathBuf> {
    write(dir.join(RESOLVED_SPEC), &spec.to_toml())
}

pub fn write_plot_script(dir: &Path) -> Result<PathBuf> {
    write(dir.join(PLOT_FILE), PLOT_SCRIPT)
}
