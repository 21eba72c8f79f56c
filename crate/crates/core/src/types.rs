//! Value types shared by every stage of the closed loop.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Wraps an angle onto the principal branch (−π, π].
///
/// Angles already on the branch are returned unchanged, which makes the
/// function exactly idempotent.
pub fn wrap_angle(a: f64) -> Result<f64> {
    ensure_finite("angle", a)?;
    Ok(wrap(a))
}

/// Unchecked [`wrap_angle`] for hot paths whose inputs are already finite.
#[inline]
pub(crate) fn wrap(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Planar configuration: position in meters, heading in radians on (−π, π].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Result<Self> {
        ensure_finite("x", x)?;
        ensure_finite("y", y)?;
        Ok(Self {
            x,
            y,
            theta: wrap_angle(theta)?,
        })
    }

    pub const fn origin() -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            theta: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

/// Polar navigation variables relative to a goal.
///
/// `rho` is the distance to the goal, `alpha` the bearing of the goal seen
/// from the robot heading and `beta = theta + alpha` the bearing in the world
/// frame. The heading is recovered as `beta − alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NavState {
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl NavState {
    pub fn new(rho: f64, alpha: f64, beta: f64) -> Result<Self> {
        ensure_finite("rho", rho)?;
        if rho < 0.0 {
            return Err(Error::InvalidInput(format!("rho must be >= 0, got {rho}")));
        }
        Ok(Self {
            rho,
            alpha: wrap_angle(alpha)?,
            beta: wrap_angle(beta)?,
        })
    }

    /// Heading relative to the goal frame, `beta − alpha` wrapped.
    pub fn theta(&self) -> f64 {
        wrap(self.beta - self.alpha)
    }
}

/// Linear (m/s) and angular (rad/s) velocity.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VelocityCommand {
    pub v: f64,
    pub omega: f64,
}

impl VelocityCommand {
    pub const fn new(v: f64, omega: f64) -> Self {
        Self { v, omega }
    }

    pub const fn zero() -> Self {
        Self { v: 0.0, omega: 0.0 }
    }
}

/// Wheel radius `R` and wheel separation `L`, both in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotGeometry {
    pub wheel_radius: f64,
    pub wheel_separation: f64,
}

impl Default for RobotGeometry {
    /// The laboratory robot: R = 0.05 m, L = 0.6 m.
    fn default() -> Self {
        Self {
            wheel_radius: 0.05,
            wheel_separation: 0.6,
        }
    }
}

impl RobotGeometry {
    pub fn new(wheel_radius: f64, wheel_separation: f64) -> Result<Self> {
        let geom = Self {
            wheel_radius,
            wheel_separation,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(self.wheel_radius) && ok(self.wheel_separation) {
            Ok(())
        } else {
            Err(Error::InvalidGeometry {
                radius: self.wheel_radius,
                separation: self.wheel_separation,
            })
        }
    }

    /// Forward map from wheel angular speeds to body velocity:
    /// `v = R(ω_L + ω_R)/2`, `ω = R(ω_R − ω_L)/L`.
    pub fn body_velocity(&self, omega_left: f64, omega_right: f64) -> VelocityCommand {
        let r = self.wheel_radius;
        VelocityCommand {
            v: r * (omega_left + omega_right) / 2.0,
            omega: r * (omega_right - omega_left) / self.wheel_separation,
        }
    }
}

/// Converts a body command into `(ω_L, ω_R)` wheel speeds in rad/s.
pub fn command_to_wheel_speeds(cmd: VelocityCommand, geom: RobotGeometry) -> Result<(f64, f64)> {
    geom.validate()?;
    let two_r = 2.0 * geom.wheel_radius;
    let turn = geom.wheel_separation * cmd.omega;
    Ok(((2.0 * cmd.v - turn) / two_r, (2.0 * cmd.v + turn) / two_r))
}

/// Magnitude bounds of the five primary disturbances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseBounds {
    pub eps_x_max: f64,
    pub eps_y_max: f64,
    pub eps_theta_max: f64,
    pub eps_v_max: f64,
    pub eps_omega_max: f64,
}

impl NoiseBounds {
    pub const fn zero() -> Self {
        Self {
            eps_x_max: 0.0,
            eps_y_max: 0.0,
            eps_theta_max: 0.0,
            eps_v_max: 0.0,
            eps_omega_max: 0.0,
        }
    }

    /// Largest estimator error of the laboratory localizer (0.3 m, 0.3 m,
    /// 0.17 rad) plus a ±5 % wheel-speed error at 1.3 m/s (0.065 m/s,
    /// 0.2167 rad/s).
    pub const fn lab() -> Self {
        Self {
            eps_x_max: 0.3,
            eps_y_max: 0.3,
            eps_theta_max: 0.17,
            eps_v_max: 0.065,
            eps_omega_max: 0.2167,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_array().iter().all(|&b| b == 0.0)
    }

    pub fn as_array(&self) -> [f64; 5] {
        [
            self.eps_x_max,
            self.eps_y_max,
            self.eps_theta_max,
            self.eps_v_max,
            self.eps_omega_max,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        const NAMES: [&str; 5] = ["eps_x_max", "eps_y_max", "eps_theta_max", "eps_v_max", "eps_omega_max"];
        for (name, b) in NAMES.iter().zip(self.as_array()) {
            if !(b.is_finite() && b >= 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be finite and >= 0, got {b}")));
            }
        }
        Ok(())
    }

    /// Upper bound on `|ε_ρ| + |ε_v|/γ`, using `|ε_ρ| ≤ sqrt(ε_X² + ε_Y²)`.
    pub fn required_switch_radius(&self, gamma: f64) -> f64 {
        self.eps_x_max.hypot(self.eps_y_max) + self.eps_v_max / gamma
    }
}

impl Default for NoiseBounds {
    fn default() -> Self {
        Self::lab()
    }
}

/// Gains of the two-regime law and the Ω_G → Ω_L switch radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerParams {
    /// Velocity cap and global gain, m/s.
    pub gamma: f64,
    /// Global angular gain, 1/s.
    pub k: f64,
    /// Weight of `beta` in the global Lyapunov function.
    pub h: f64,
    /// Local heading gain, 1/s.
    pub k2: f64,
    /// Switch radius, m.
    pub eps_p: f64,
    /// Optional symmetric clamp on ω. Off by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_limit: Option<f64>,
}

impl Default for ControllerParams {
    /// γ = 1.3, k = 1, h = 0.17, k₂ = 2.7, ε_P = 0.5 m.
    fn default() -> Self {
        Self {
            gamma: 1.3,
            k: 1.0,
            h: 0.17,
            k2: 2.7,
            eps_p: 0.5,
            omega_limit: None,
        }
    }
}

impl ControllerParams {
    /// Checks gain positivity and that the switch radius dominates the
    /// worst-case `|ε_ρ| + |ε_v|/γ` for `bounds`.
    pub fn validate(&self, bounds: &NoiseBounds) -> Result<()> {
        let positive = [
            ("gamma", self.gamma),
            ("k", self.k),
            ("h", self.h),
            ("k2", self.k2),
            ("eps_p", self.eps_p),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and > 0, got {value}"
                )));
            }
        }
        if let Some(limit) = self.omega_limit {
            if !(limit.is_finite() && limit > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "omega_limit must be finite and > 0, got {limit}"
                )));
            }
        }
        let required = bounds.required_switch_radius(self.gamma);
        if self.eps_p <= required {
            return Err(Error::InvalidConfig(format!(
                "eps_p = {} must exceed {required:.6} m for the configured noise bounds",
                self.eps_p
            )));
        }
        Ok(())
    }
}

/// Operating configuration: far from the goal (Ω_G) or near it (Ω_L).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Regime {
    Global,
    Local,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Global => "GLOBAL",
            Regime::Local => "LOCAL",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "GLOBAL" => Ok(Regime::Global),
            "LOCAL" => Ok(Regime::Local),
            other => Err(Error::Format(format!("unknown regime `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap_angle(0.0).unwrap(), 0.0);
        assert_eq!(wrap_angle(3.0 * PI).unwrap(), PI);
        assert_relative_eq!(wrap_angle(-3.5 * PI).unwrap(), 0.5 * PI, epsilon = 1e-15);
        assert_eq!(wrap_angle(PI).unwrap(), PI);
        assert_eq!(wrap_angle(-PI).unwrap(), PI);
    }

    #[test]
    fn wrap_rejects_non_finite() {
        assert!(matches!(wrap_angle(f64::NAN), Err(Error::InvalidInput(_))));
        assert!(wrap_angle(f64::INFINITY).is_err());
    }

    #[test]
    fn wheel_speed_examples() {
        let g = RobotGeometry::default();
        assert_eq!(
            command_to_wheel_speeds(VelocityCommand::new(0.0, 0.0), g).unwrap(),
            (0.0, 0.0)
        );
        let (l, r) = command_to_wheel_speeds(VelocityCommand::new(1.0, 0.0), g).unwrap();
        assert_relative_eq!(l, 20.0, epsilon = 1e-12);
        assert_relative_eq!(r, 20.0, epsilon = 1e-12);
        let (l, r) = command_to_wheel_speeds(VelocityCommand::new(0.0, 1.0), g).unwrap();
        assert_relative_eq!(l, -6.0, epsilon = 1e-12);
        assert_relative_eq!(r, 6.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_radius_is_rejected() {
        let g = RobotGeometry {
            wheel_radius: 0.0,
            wheel_separation: 0.6,
        };
        assert!(matches!(
            command_to_wheel_speeds(VelocityCommand::zero(), g),
            Err(Error::InvalidGeometry { .. })
        ));
    }

    #[test]
    fn lab_switch_radius_is_admissible() {
        let bounds = NoiseBounds::lab();
        let required = bounds.required_switch_radius(1.3);
        assert_relative_eq!(required, 0.3f64.hypot(0.3) + 0.05, epsilon = 1e-12);
        assert!(required < 0.5);
        ControllerParams::default().validate(&bounds).unwrap();

        let tight = ControllerParams {
            eps_p: 0.45,
            ..Default::default()
        };
        assert!(tight.validate(&bounds).is_err());
    }

    #[test]
    fn nav_state_recovers_heading() {
        let nav = NavState::new(1.0, 0.3, -2.9).unwrap();
        assert_relative_eq!(nav.theta(), wrap(-3.2), epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn wrap_is_idempotent_and_in_range(a in -1e4f64..1e4) {
            let w = wrap_angle(a).unwrap();
            prop_assert!(w > -PI && w <= PI);
            prop_assert_eq!(wrap_angle(w).unwrap(), w);
            let k = ((a - w) / TAU).round();
            prop_assert!((a - w - k * TAU).abs() < 1e-9);
        }

        #[test]
        fn wheel_speeds_round_trip(v in -10.0f64..10.0, omega in -10.0f64..10.0) {
            let g = RobotGeometry::default();
            let (l, r) = command_to_wheel_speeds(VelocityCommand::new(v, omega), g).unwrap();
            let back = g.body_velocity(l, r);
            let scale = v.abs().max(omega.abs()).max(1.0);
            prop_assert!((back.v - v).abs() <= 1e-12 * scale);
            prop_assert!((back.omega - omega).abs() <= 1e-12 * scale);
        }
    }
}
