//! Robust point stabilization of a differential-drive robot in discrete time.
//!
//! The robot is driven to a goal pose with a Lyapunov-based law on the polar
//! navigation variables `(ρ, α, β)`. Far from the goal the law shapes all
//! three variables. Inside a switch radius it keeps the saturated linear
//! velocity and regulates the heading directly, which rejects bounded
//! measurement and actuator noise near the goal.
//!
//! ```
//! use polarstab::{run_episode, NoiseBounds, SimConfig};
//!
//! let config = SimConfig { bounds: NoiseBounds::zero(), ..Default::default() };
//! let result = run_episode(&config).unwrap();
//! assert!(result.settled);
//! ```

pub mod controller;
mod error;
pub mod kinematics;
pub mod lyapunov;
pub mod noise;
pub mod simulation;
pub mod trajectory;
pub mod types;

pub use controller::{
    compute_command, global_law, local_law, select_regime, ControlDecision, ControllerState, LawVariant,
};
pub use error::{Error, Result};
pub use kinematics::{cartesian_step, classify_alpha, noisy_polar_step, polar_step, to_nav_state, AlphaBranch};
pub use lyapunov::{delta_v, lyapunov_value, v_global, v_local, DeltaV, LyapunovRecord};
pub use noise::{draw_sample, measure, MeasuredNavState, NoiseSample, NoiseStream};
pub use simulation::{
    ring_experiment, ring_starts, run_campaign_with, run_episode, run_episode_with, run_monte_carlo, EpisodeResult,
    FinalErrors, MonteCarloSummary, RunOutcome, SimConfig, Stats, StepRecord,
};
pub use trajectory::{emit_trajectory, Format, TrajectoryRow};
pub use types::{
    command_to_wheel_speeds, wrap_angle, ControllerParams, NavState, NoiseBounds, Pose, Regime, RobotGeometry,
    VelocityCommand,
};
