//! Unicycle kinematics in Cartesian and polar navigation form.
//!
//! The closed loop propagates the Cartesian pose with a forward-Euler step
//! and re-derives the navigation variables each step. The polar updates are
//! kept for analysis and for cross-checking the two representations.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::types::{wrap, NavState, Pose, VelocityCommand};
use std::f64::consts::FRAC_PI_2;

/// Which half-plane the goal lies in relative to the robot heading.
///
/// `Backward` covers |α| ≥ π/2. Laws and polar updates on that branch express
/// the linear velocity in a reversed drive frame, so the body velocity is `−v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AlphaBranch {
    Forward,
    Backward,
}

impl AlphaBranch {
    /// Sign relating branch-frame velocity to body velocity.
    pub fn drive_sign(self) -> f64 {
        match self {
            AlphaBranch::Forward => 1.0,
            AlphaBranch::Backward => -1.0,
        }
    }

    /// Maps a branch-frame command to the body command sent to the wheels.
    pub fn to_body(self, cmd: VelocityCommand) -> VelocityCommand {
        VelocityCommand {
            v: self.drive_sign() * cmd.v,
            omega: cmd.omega,
        }
    }
}

pub fn classify_alpha(alpha: f64) -> AlphaBranch {
    if alpha.abs() < FRAC_PI_2 {
        AlphaBranch::Forward
    } else {
        AlphaBranch::Backward
    }
}

/// Navigation variables of `pose` relative to `goal`.
///
/// At the goal position the bearing is taken as 0, so `alpha = −theta`.
pub fn to_nav_state(pose: &Pose, goal: &Pose) -> Result<NavState> {
    for (name, v) in [
        ("pose.x", pose.x),
        ("pose.y", pose.y),
        ("pose.theta", pose.theta),
        ("goal.x", goal.x),
        ("goal.y", goal.y),
    ] {
        ensure_finite(name, v)?;
    }
    Ok(nav_unchecked(pose.x, pose.y, pose.theta, goal))
}

#[inline]
pub(crate) fn nav_unchecked(x: f64, y: f64, theta: f64, goal: &Pose) -> NavState {
    let dx = goal.x - x;
    let dy = goal.y - y;
    let rho = dx.hypot(dy);
    let bearing = if rho == 0.0 { 0.0 } else { dy.atan2(dx) };
    let alpha = wrap(bearing - theta);
    NavState {
        rho,
        alpha,
        beta: wrap(theta + alpha),
    }
}

/// One forward-Euler step of the unicycle in world coordinates.
pub fn cartesian_step(pose: &Pose, cmd: VelocityCommand, ts: f64) -> Result<Pose> {
    check_ts(ts)?;
    Ok(cartesian_unchecked(pose, cmd, ts))
}

#[inline]
pub(crate) fn cartesian_unchecked(pose: &Pose, cmd: VelocityCommand, ts: f64) -> Pose {
    let (s, c) = pose.theta.sin_cos();
    Pose {
        x: pose.x + ts * cmd.v * c,
        y: pose.y + ts * cmd.v * s,
        theta: wrap(pose.theta + ts * cmd.omega),
    }
}

/// One step of the discrete polar model. `cmd.v` is in the branch frame.
pub fn polar_step(nav: &NavState, cmd: VelocityCommand, ts: f64, branch: AlphaBranch) -> Result<NavState> {
    noisy_polar_step(nav, cmd, (0.0, 0.0), ts, branch)
}

/// Polar step with actuator disturbances `(ε_v, ε_ω)` added to the inputs.
pub fn noisy_polar_step(
    nav: &NavState,
    cmd: VelocityCommand,
    sys_noise: (f64, f64),
    ts: f64,
    branch: AlphaBranch,
) -> Result<NavState> {
    check_ts(ts)?;
    if nav.rho.is_nan() || nav.rho <= 0.0 {
        return Err(Error::DegenerateState { rho: nav.rho });
    }
    let v = cmd.v + sys_noise.0;
    let omega = cmd.omega + sys_noise.1;
    let s = branch.drive_sign();
    let (sin_a, cos_a) = nav.alpha.sin_cos();
    let lateral = v * ts * sin_a / nav.rho;
    Ok(NavState {
        rho: (nav.rho - s * v * ts * cos_a).max(0.0),
        alpha: wrap(nav.alpha + s * lateral - omega * ts),
        beta: wrap(nav.beta + s * lateral),
    })
}

fn check_ts(ts: f64) -> Result<()> {
    if ts.is_finite() && ts > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "sample time must be finite and > 0, got {ts}"
        )))
    }
}
