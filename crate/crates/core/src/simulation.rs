//! Closed-loop episodes and Monte-Carlo campaigns.
//!
//! Each control step:
//!
//! 1. draw a [`NoiseSample`],
//! 2. measure the navigation variables from the corrupted pose,
//! 3. run the controller on the measurement,
//! 4. drive the true pose with the commanded velocities plus actuator noise,
//! 5. log the step together with the Lyapunov value of the active regime.
//!
//! The loop stops once the true distance to the goal is within `rho_tol`, or
//! after `max_steps`.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controller::{ControllerState, LawVariant};
use crate::error::{Error, Result};
use crate::kinematics::{cartesian_unchecked, nav_unchecked, AlphaBranch};
use crate::lyapunov::{lyapunov_value, LyapunovRecord};
use crate::noise::{measure_unchecked, MeasuredNavState, NoiseStream};
use crate::types::{wrap, ControllerParams, NavState, NoiseBounds, Pose, Regime, VelocityCommand};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub start: Pose,
    pub goal: Pose,
    /// Sample time, seconds.
    pub ts: f64,
    pub max_steps: usize,
    /// Arrival tolerance on the true distance, meters.
    pub rho_tol: f64,
    /// Heading tolerance, radians.
    pub theta_tol: f64,
    pub controller: ControllerParams,
    pub bounds: NoiseBounds,
    pub seed: u64,
    pub law: LawVariant,
}

impl Default for SimConfig {
    /// Start (−2, −5.5, 30°), goal at the origin, Ts = 0.1 s, 6000 steps,
    /// ρ tolerance 1e−5 m, laboratory gains and noise bounds.
    fn default() -> Self {
        Self {
            start: Pose {
                x: -2.0,
                y: -5.5,
                theta: 30f64.to_radians(),
            },
            goal: Pose::origin(),
            ts: 0.1,
            max_steps: 6000,
            rho_tol: 1e-5,
            theta_tol: 1e-3,
            controller: ControllerParams::default(),
            bounds: NoiseBounds::lab(),
            seed: 0,
            law: LawVariant::TwoRegime,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.start.is_finite() || !self.goal.is_finite() {
            return Err(Error::InvalidConfig("start and goal poses must be finite".into()));
        }
        if !(self.ts.is_finite() && self.ts > 0.0) {
            return Err(Error::InvalidConfig(format!("ts must be > 0, got {}", self.ts)));
        }
        if !(self.rho_tol.is_finite() && self.rho_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "rho_tol must be > 0, got {}",
                self.rho_tol
            )));
        }
        if !(self.theta_tol.is_finite() && self.theta_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "theta_tol must be > 0, got {}",
                self.theta_tol
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be >= 1".into()));
        }
        self.bounds.validate()?;
        self.controller.validate(&self.bounds)
    }

    /// Heading error accepted when judging whether a noisy run has settled.
    pub fn settle_heading_tol(&self) -> f64 {
        self.bounds.eps_theta_max.max(self.theta_tol)
    }
}

/// One logged control step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    /// True pose at the start of the step.
    pub pose: Pose,
    pub nav: NavState,
    pub meas: MeasuredNavState,
    /// Body-frame command sent to the wheels, before actuator noise.
    pub command: VelocityCommand,
    pub branch: AlphaBranch,
    pub regime: Regime,
    /// Lyapunov function of `regime` on the true state.
    pub lyapunov: f64,
    /// Exact change of that function over this step.
    pub delta_v: f64,
}

impl StepRecord {
    pub fn lyapunov_record(&self) -> LyapunovRecord {
        LyapunovRecord {
            step_index: self.step,
            regime: self.regime,
            v: self.lyapunov,
            delta_v: self.delta_v,
        }
    }
}

/// Absolute final errors `(|x − X_d|, |y − Y_d|, |θ − θ_d|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinalErrors {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl FinalErrors {
    pub fn of(pose: &Pose, goal: &Pose) -> Self {
        Self {
            x: (pose.x - goal.x).abs(),
            y: (pose.y - goal.y).abs(),
            theta: wrap(pose.theta - goal.theta).abs(),
        }
    }

    pub fn position(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub trajectory: Vec<StepRecord>,
    pub final_pose: Pose,
    pub final_errors: FinalErrors,
    pub final_regime: Regime,
    pub steps_used: usize,
    /// True distance to the goal at the end is within `rho_tol`.
    pub converged: bool,
    /// The run ended inside the switch radius with a heading error no larger
    /// than the heading-noise bound (or `theta_tol` without noise).
    pub settled: bool,
}

impl EpisodeResult {
    pub fn final_rho(&self) -> f64 {
        self.final_errors.position()
    }

    pub fn max_abs_v(&self) -> f64 {
        self.trajectory.iter().map(|r| r.command.v.abs()).fold(0.0, f64::max)
    }

    pub fn visits_branch(&self, branch: AlphaBranch) -> bool {
        self.trajectory.iter().any(|r| r.branch == branch)
    }
}

pub fn run_episode(config: &SimConfig) -> Result<EpisodeResult> {
    run_episode_with(config, NoiseStream::new(config.seed))
}

/// Runs one episode drawing noise from `stream`.
pub fn run_episode_with(config: &SimConfig, mut stream: NoiseStream) -> Result<EpisodeResult> {
    config.validate()?;
    let goal = config.goal;
    let h = config.controller.h;
    let mut controller = ControllerState::new(config.controller, config.law);
    let mut pose = config.start;
    let mut nav = nav_unchecked(pose.x, pose.y, pose.theta, &goal);
    let mut trajectory = Vec::with_capacity(config.max_steps.min(8192));

    let abort = |step: usize, reason: String, trajectory: Vec<StepRecord>| Error::Aborted {
        step,
        reason,
        trajectory: Box::new(trajectory),
    };

    for step in 0..config.max_steps {
        if nav.rho <= config.rho_tol {
            break;
        }
        let sample = stream.draw(&config.bounds);
        let meas = measure_unchecked(&pose, &goal, &sample);
        let decision = match controller.update(&meas) {
            Ok(d) => d,
            Err(e) => return Err(abort(step, e.to_string(), trajectory)),
        };
        let command = decision.body_command();
        let actuated = VelocityCommand::new(command.v + sample.eps_v, command.omega + sample.eps_omega);
        let next = cartesian_unchecked(&pose, actuated, config.ts);
        if !next.is_finite() {
            return Err(abort(step, format!("non-finite pose {next:?}"), trajectory));
        }
        let next_nav = nav_unchecked(next.x, next.y, next.theta, &goal);
        let v_now = lyapunov_value(decision.regime, &nav, h);
        trajectory.push(StepRecord {
            step,
            t: step as f64 * config.ts,
            pose,
            nav,
            meas,
            command,
            branch: decision.branch,
            regime: decision.regime,
            lyapunov: v_now,
            delta_v: lyapunov_value(decision.regime, &next_nav, h) - v_now,
        });
        pose = next;
        nav = next_nav;
    }

    let final_errors = FinalErrors::of(&pose, &goal);
    Ok(EpisodeResult {
        steps_used: trajectory.len(),
        converged: nav.rho <= config.rho_tol,
        settled: nav.rho <= config.controller.eps_p && final_errors.theta <= config.settle_heading_tol(),
        final_regime: controller.regime,
        final_pose: pose,
        final_errors,
        trajectory,
    })
}

/// Runs `runs` independent episodes in parallel and maps each through
/// `inspect` on the worker, returning the mapped values in run order.
///
/// Run `i` draws its noise from stream `i` of the master seed.
pub fn run_campaign_with<T, F>(config: &SimConfig, runs: usize, inspect: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, Result<EpisodeResult>) -> T + Sync,
{
    if runs == 0 {
        return Err(Error::InvalidConfig("runs must be >= 1".into()));
    }
    config.validate()?;
    Ok((0..runs as u64)
        .into_par_iter()
        .map(|i| inspect(i, run_episode_with(config, NoiseStream::for_run(config.seed, i))))
        .collect())
}

/// Per-run line of a campaign summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub run_index: u64,
    /// Stream id under the master seed.
    pub stream: u64,
    pub steps_used: usize,
    pub converged: bool,
    pub settled: bool,
    pub final_errors: Option<FinalErrors>,
    pub aborted: Option<String>,
}

impl RunOutcome {
    pub fn from_result(run_index: u64, result: &Result<EpisodeResult>) -> Self {
        match result {
            Ok(ep) => Self {
                run_index,
                stream: run_index,
                steps_used: ep.steps_used,
                converged: ep.converged,
                settled: ep.settled,
                final_errors: Some(ep.final_errors),
                aborted: None,
            },
            Err(e) => Self {
                run_index,
                stream: run_index,
                steps_used: match e {
                    Error::Aborted { step, .. } => *step,
                    _ => 0,
                },
                converged: false,
                settled: false,
                final_errors: None,
                aborted: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    pub std: f64,
}

impl Stats {
    /// Statistics of a non-empty sample; `None` when empty.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len().is_multiple_of(2) {
            0.5 * (sorted[mid - 1] + sorted[mid])
        } else {
            sorted[mid]
        };
        Some(Self {
            mean,
            median,
            max: sorted[sorted.len() - 1],
            std: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub runs: usize,
    pub master_seed: u64,
    pub law: LawVariant,
    /// Fraction of runs that settled.
    pub success_rate: f64,
    /// Fraction of runs that met the strict `rho_tol` arrival criterion.
    pub converged_rate: f64,
    pub aborted: usize,
    /// Final true distance to the goal over non-aborted runs.
    pub final_rho: Option<Stats>,
    /// Final absolute heading error over non-aborted runs.
    pub final_theta: Option<Stats>,
    pub per_run: Vec<RunOutcome>,
}

impl MonteCarloSummary {
    pub fn from_outcomes(config: &SimConfig, per_run: Vec<RunOutcome>) -> Self {
        let runs = per_run.len();
        let finished: Vec<FinalErrors> = per_run.iter().filter_map(|r| r.final_errors).collect();
        let rho: Vec<f64> = finished.iter().map(FinalErrors::position).collect();
        let theta: Vec<f64> = finished.iter().map(|e| e.theta).collect();
        let frac = |n: usize| if runs == 0 { 0.0 } else { n as f64 / runs as f64 };
        Self {
            runs,
            master_seed: config.seed,
            law: config.law,
            success_rate: frac(per_run.iter().filter(|r| r.settled).count()),
            converged_rate: frac(per_run.iter().filter(|r| r.converged).count()),
            aborted: per_run.iter().filter(|r| r.aborted.is_some()).count(),
            final_rho: Stats::of(&rho),
            final_theta: Stats::of(&theta),
            per_run,
        }
    }
}

pub fn run_monte_carlo(config: &SimConfig, runs: usize) -> Result<MonteCarloSummary> {
    let outcomes = run_campaign_with(config, runs, |i, r| RunOutcome::from_result(i, &r))?;
    Ok(MonteCarloSummary::from_outcomes(config, outcomes))
}

/// Start poses spread evenly on a circle around the goal, all sharing one heading.
pub fn ring_starts(goal: &Pose, radius: f64, n_starts: usize, heading: f64) -> Result<Vec<Pose>> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidConfig(format!("ring radius must be > 0, got {radius}")));
    }
    if n_starts == 0 {
        return Err(Error::InvalidConfig("n_starts must be >= 1".into()));
    }
    (0..n_starts)
        .map(|j| {
            let phi = TAU * j as f64 / n_starts as f64;
            Pose::new(goal.x + radius * phi.cos(), goal.y + radius * phi.sin(), heading)
        })
        .collect()
}

/// Runs one episode from each ring start. Episode `j` uses noise stream `j`.
pub fn ring_experiment(radius: f64, n_starts: usize, heading: f64, template: &SimConfig) -> Result<Vec<EpisodeResult>> {
    let starts = ring_starts(&template.goal, radius, n_starts, heading)?;
    starts
        .into_par_iter()
        .enumerate()
        .map(|(j, start)| {
            let config = SimConfig { start, ..*template };
            run_episode_with(&config, NoiseStream::for_run(template.seed, j as u64))
        })
        .collect()
}
