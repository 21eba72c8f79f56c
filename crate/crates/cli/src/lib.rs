//! Batch front-end for `polarstab`: experiment files, execution and output.

pub mod analyze;
pub mod config;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use polarstab::{
    emit_trajectory, ring_starts, run_campaign_with, run_episode_with, EpisodeResult, Error, Format, MonteCarloSummary,
    NoiseStream, RunOutcome, SimConfig,
};

use crate::config::{ExperimentSpec, Mode};

/// What one experiment produced.
#[derive(Debug)]
pub struct ExperimentReport {
    pub name: String,
    pub dir: PathBuf,
    pub summary: MonteCarloSummary,
    pub table: String,
}

impl ExperimentReport {
    /// Every run settled and none aborted.
    pub fn succeeded(&self) -> bool {
        self.summary.aborted == 0 && self.summary.success_rate == 1.0
    }
}

/// Trajectory of a finished or aborted episode.
fn trajectory_of(result: &polarstab::Result<EpisodeResult>) -> Option<EpisodeResult> {
    match result {
        Ok(ep) => Some(ep.clone()),
        Err(Error::Aborted { trajectory, .. }) => Some(partial(trajectory)),
        Err(_) => None,
    }
}

fn partial(trajectory: &[polarstab::StepRecord]) -> EpisodeResult {
    let last = trajectory.last();
    let pose = last.map_or_else(polarstab::Pose::origin, |r| r.pose);
    EpisodeResult {
        trajectory: trajectory.to_vec(),
        final_pose: pose,
        final_errors: polarstab::FinalErrors {
            x: f64::NAN,
            y: f64::NAN,
            theta: f64::NAN,
        },
        final_regime: last.map_or(polarstab::Regime::Global, |r| r.regime),
        steps_used: trajectory.len(),
        converged: false,
        settled: false,
    }
}

fn write_episode(result: &polarstab::Result<EpisodeResult>, dir: &Path, stem: &str, format: Format) -> Result<()> {
    if let Some(ep) = trajectory_of(result) {
        let path = dir.join(format!("{stem}.{}", format.extension()));
        emit_trajectory(&ep, format, &path)?;
    }
    Ok(())
}

/// Runs one experiment and writes its outputs into `base/<name>/`.
///
/// Single runs write `trajectory.*`, Monte-Carlo campaigns write the first
/// run as `run_000.*`, ring experiments write `start_<j>.*`. Every mode
/// writes `summary.json`, `summary.txt`, `resolved.toml` and `plot.py`.
pub fn run_experiment(spec: &ExperimentSpec, base: &Path, format: Format) -> Result<ExperimentReport> {
    let dir = base.join(&spec.name);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    output::write_resolved(spec, &dir)?;
    output::write_plot_script(&dir)?;

    let sim = &spec.sim;
    let outcomes = match spec.mode {
        Mode::Single => {
            let r = run_episode_with(sim, NoiseStream::new(sim.seed));
            write_episode(&r, &dir, "trajectory", format)?;
            vec![RunOutcome::from_result(0, &r)]
        }
        Mode::MonteCarlo => {
            let mut first = None;
            let mut outcomes = Vec::with_capacity(spec.runs);
            for (outcome, episode) in run_campaign_with(sim, spec.runs, |i, r| {
                (RunOutcome::from_result(i, &r), if i == 0 { Some(r) } else { None })
            })? {
                outcomes.push(outcome);
                first = first.or(episode);
            }
            if let Some(r) = first {
                write_episode(&r, &dir, "run_000", format)?;
            }
            outcomes
        }
        Mode::Ring => {
            let ring = &spec.ring;
            let starts = ring_starts(&sim.goal, ring.radius, ring.n_starts, ring.heading)?;
            let width = (starts.len() - 1).to_string().len();
            let mut outcomes = Vec::with_capacity(starts.len());
            for (j, start) in starts.into_iter().enumerate() {
                let config = SimConfig { start, ..*sim };
                let r = run_episode_with(&config, NoiseStream::for_run(sim.seed, j as u64));
                write_episode(&r, &dir, &format!("start_{j:0width$}"), format)?;
                outcomes.push(RunOutcome::from_result(j as u64, &r));
            }
            outcomes
        }
    };
    let summary = MonteCarloSummary::from_outcomes(sim, outcomes);
    let table = output::emit_summary(&spec.name, &summary, &dir)?;
    Ok(ExperimentReport {
        name: spec.name.clone(),
        dir,
        summary,
        table,
    })
}
