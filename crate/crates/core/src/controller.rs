//! Two-regime stabilizing law.
//!
//! Far from the goal (Ω_G) the law shapes `(ρ, α, β)` jointly:
//!
//! ```text
//! v = ±γ tanh(ρ̂) cos(α̂)
//! ω = k α̂ + γ (sin α̂ / α̂)(tanh ρ̂ / ρ̂) cos(α̂) (α̂ + h β̂)
//! ```
//!
//! Inside the switch radius (Ω_L) the same `v` is kept and the heading is
//! regulated directly with `ω = −k₂ θ̂`, `θ̂ = β̂ − α̂`.
//!
//! Both laws consume only measured quantities. `v` is returned in the drive
//! frame of the α branch; use [`ControlDecision::body_command`] to obtain the
//! command for the wheels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{classify_alpha, AlphaBranch};
use crate::noise::MeasuredNavState;
use crate::types::{ControllerParams, Regime, VelocityCommand};

/// Below this |α̂| the factor sin α̂ / α̂ is replaced by its limit 1.
pub const SINC_GUARD: f64 = 1e-8;
/// Below this ρ̂ the factor tanh ρ̂ / ρ̂ is replaced by its limit 1.
pub const TANH_RATIO_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawVariant {
    /// Global law in Ω_G, local heading law in Ω_L.
    #[default]
    TwoRegime,
    /// Global law everywhere, no switch.
    GlobalOnly,
}

impl std::str::FromStr for LawVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-regime" => Ok(LawVariant::TwoRegime),
            "global-only" => Ok(LawVariant::GlobalOnly),
            other => Err(Error::InvalidConfig(format!(
                "unknown law `{other}` (expected two-regime or global-only)"
            ))),
        }
    }
}

impl std::fmt::Display for LawVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LawVariant::TwoRegime => "two-regime",
            LawVariant::GlobalOnly => "global-only",
        })
    }
}

#[inline]
fn sinc(a: f64) -> f64 {
    if a.abs() < SINC_GUARD {
        1.0
    } else {
        a.sin() / a
    }
}

#[inline]
fn tanh_ratio(rho: f64) -> f64 {
    if rho < TANH_RATIO_GUARD {
        1.0
    } else {
        rho.tanh() / rho
    }
}

fn check_measurement(meas: &MeasuredNavState) -> Result<()> {
    let finite = meas.rho_m.is_finite() && meas.alpha_m.is_finite() && meas.beta_m.is_finite();
    if !finite || meas.rho_m < 0.0 {
        return Err(Error::DegenerateMeasurement { rho_m: meas.rho_m });
    }
    Ok(())
}

/// Saturated linear velocity shared by both regimes, in the branch frame.
#[inline]
fn linear_velocity(meas: &MeasuredNavState, params: &ControllerParams, branch: AlphaBranch) -> f64 {
    branch.drive_sign() * params.gamma * meas.rho_m.tanh() * meas.alpha_m.cos()
}

#[inline]
fn clamp_omega(omega: f64, params: &ControllerParams) -> f64 {
    match params.omega_limit {
        Some(limit) => omega.clamp(-limit, limit),
        None => omega,
    }
}

pub fn global_law(meas: &MeasuredNavState, params: &ControllerParams, branch: AlphaBranch) -> Result<VelocityCommand> {
    check_measurement(meas)?;
    let (a, b) = (meas.alpha_m, meas.beta_m);
    let omega = params.k * a + params.gamma * sinc(a) * tanh_ratio(meas.rho_m) * a.cos() * (a + params.h * b);
    Ok(VelocityCommand {
        v: linear_velocity(meas, params, branch),
        omega: clamp_omega(omega, params),
    })
}

pub fn local_law(meas: &MeasuredNavState, params: &ControllerParams, branch: AlphaBranch) -> Result<VelocityCommand> {
    check_measurement(meas)?;
    Ok(VelocityCommand {
        v: linear_velocity(meas, params, branch),
        omega: clamp_omega(-params.k2 * meas.heading(), params),
    })
}

/// Regime of one episode together with the gains that drive it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    pub regime: Regime,
    pub params: ControllerParams,
    #[serde(default)]
    pub variant: LawVariant,
}

/// Output of one control update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlDecision {
    /// Command in the drive frame of `branch`.
    pub command: VelocityCommand,
    pub branch: AlphaBranch,
    pub regime: Regime,
}

impl ControlDecision {
    pub fn body_command(&self) -> VelocityCommand {
        self.branch.to_body(self.command)
    }
}

/// Latched switch: Ω_G becomes Ω_L once `rho_m ≤ eps_p` and never reverts.
pub fn select_regime(state: &ControllerState, meas: &MeasuredNavState) -> Regime {
    match (state.variant, state.regime) {
        (LawVariant::GlobalOnly, _) => Regime::Global,
        (_, Regime::Local) => Regime::Local,
        (_, Regime::Global) if meas.rho_m <= state.params.eps_p => Regime::Local,
        _ => Regime::Global,
    }
}

pub fn compute_command(state: &ControllerState, meas: &MeasuredNavState) -> Result<ControlDecision> {
    let regime = select_regime(state, meas);
    let branch = classify_alpha(meas.alpha_m);
    let command = match regime {
        Regime::Global => global_law(meas, &state.params, branch)?,
        Regime::Local => local_law(meas, &state.params, branch)?,
    };
    Ok(ControlDecision {
        command,
        branch,
        regime,
    })
}

impl ControllerState {
    pub fn new(params: ControllerParams, variant: LawVariant) -> Self {
        Self {
            regime: Regime::Global,
            params,
            variant,
        }
    }

    /// Computes the next command and latches the regime it used.
    pub fn update(&mut self, meas: &MeasuredNavState) -> Result<ControlDecision> {
        let decision = compute_command(self, meas)?;
        self.regime = decision.regime;
        Ok(decision)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn meas(rho_m: f64, alpha_m: f64, beta_m: f64) -> MeasuredNavState {
        MeasuredNavState {
            rho_m,
            alpha_m,
            beta_m,
            theta_m: crate::types::wrap(beta_m - alpha_m),
        }
    }

    fn lab() -> ControllerParams {
        ControllerParams::default()
    }

    #[test]
    fn global_law_examples() {
        let c = global_law(&meas(1.0, 0.0, 0.0), &lab(), AlphaBranch::Forward).unwrap();
        assert_relative_eq!(c.v, 0.990_072_402_742_494_4, epsilon = 1e-12);
        assert_eq!(c.omega, 0.0);

        let c = global_law(&meas(1.0, 0.5, 0.5), &lab(), AlphaBranch::Forward).unwrap();
        assert_relative_eq!(c.v, 0.868_870_275_655_715_1, epsilon = 1e-12);
        assert_relative_eq!(c.omega, 0.987_373_561_863_605_5, epsilon = 1e-12);

        let c = global_law(&meas(1.0, PI, 0.0), &lab(), AlphaBranch::Backward).unwrap();
        assert_relative_eq!(c.v, 0.990_072_402_742_494_4, epsilon = 1e-12);
        assert_relative_eq!(c.omega, PI, epsilon = 1e-12);
    }

    #[test]
    fn global_law_rejects_bad_measurement() {
        assert!(matches!(
            global_law(&meas(-0.1, 0.0, 0.0), &lab(), AlphaBranch::Forward),
            Err(Error::DegenerateMeasurement { .. })
        ));
        assert!(global_law(&meas(f64::NAN, 0.0, 0.0), &lab(), AlphaBranch::Forward).is_err());
    }

    #[test]
    fn local_law_examples() {
        let c = local_law(&meas(0.3, 0.0, 0.0), &lab(), AlphaBranch::Forward).unwrap();
        assert_eq!(c.omega, 0.0);

        let c = local_law(&meas(0.3, 0.0, 0.1), &lab(), AlphaBranch::Forward).unwrap();
        assert_relative_eq!(c.omega, -0.27, epsilon = 1e-15);
        assert_relative_eq!(c.v, 0.378_706_396_187_068_2, epsilon = 1e-12);

        let c = local_law(&meas(0.0, 0.0, 0.0), &lab(), AlphaBranch::Forward).unwrap();
        assert_eq!(c, VelocityCommand::zero());
    }

    #[test]
    fn regime_latch() {
        let mut state = ControllerState::new(lab(), LawVariant::TwoRegime);
        assert_eq!(select_regime(&state, &meas(5.0, 0.0, 0.0)), Regime::Global);
        assert_eq!(select_regime(&state, &meas(0.4, 0.0, 0.0)), Regime::Local);
        state.regime = Regime::Local;
        assert_eq!(select_regime(&state, &meas(0.9, 0.0, 0.0)), Regime::Local);

        let global_only = ControllerState::new(lab(), LawVariant::GlobalOnly);
        assert_eq!(select_regime(&global_only, &meas(0.01, 0.0, 0.0)), Regime::Global);
    }

    #[test]
    fn compute_command_dispatch() {
        let state = ControllerState::new(lab(), LawVariant::TwoRegime);
        let m = meas(5.852_349_955_359_813, 0.698_426_547_612_690_8, 1.222_025_323_210_989_6);
        let d = compute_command(&state, &m).unwrap();
        assert_eq!((d.regime, d.branch), (Regime::Global, AlphaBranch::Forward));
        assert_relative_eq!(d.command.v, 0.995_594_914_458_577_8, epsilon = 1e-12);
        assert_relative_eq!(d.command.omega, 0.840_352_490_166_021_3, epsilon = 1e-12);

        let near = meas(0.45, 0.2, 0.3);
        let d = compute_command(&state, &near).unwrap();
        assert_eq!(d.regime, Regime::Local);
        assert_eq!(d.command, local_law(&near, &lab(), AlphaBranch::Forward).unwrap());

        let behind = meas(5.852_35, 2.8, 1.0);
        let d = compute_command(&state, &behind).unwrap();
        assert_eq!(d.branch, AlphaBranch::Backward);
        assert_relative_eq!(d.command.v, 1.224_868_820_290_380_3, epsilon = 1e-12);
        // body frame: reverse gear toward the goal behind the robot
        assert!(d.body_command().v < 0.0);
    }

    #[test]
    fn update_latches_regime() {
        let mut state = ControllerState::new(lab(), LawVariant::TwoRegime);
        state.update(&meas(0.3, 0.0, 0.0)).unwrap();
        assert_eq!(state.regime, Regime::Local);
        let d = state.update(&meas(3.0, 0.0, 0.0)).unwrap();
        assert_eq!(d.regime, Regime::Local);
    }

    #[test]
    fn equilibrium_is_at_rest_in_both_regimes() {
        let origin = meas(0.0, 0.0, 0.0);
        for branch in [AlphaBranch::Forward, AlphaBranch::Backward] {
            assert_eq!(global_law(&origin, &lab(), branch).unwrap(), VelocityCommand::zero());
            assert_eq!(local_law(&origin, &lab(), branch).unwrap(), VelocityCommand::zero());
        }
    }

    #[test]
    fn omega_is_continuous_through_alpha_zero() {
        let p = lab();
        let w = |a| global_law(&meas(2.0, a, 0.4), &p, AlphaBranch::Forward).unwrap().omega;
        assert!((w(1e-9) - w(-1e-9)).abs() < 1e-6);
        assert!((w(1e-9) - w(0.0)).abs() < 1e-6);
    }

    #[test]
    fn omega_limit_clamps() {
        let p = ControllerParams {
            omega_limit: Some(0.5),
            ..lab()
        };
        let c = global_law(&meas(1.0, 1.2, 1.0), &p, AlphaBranch::Forward).unwrap();
        assert_eq!(c.omega, 0.5);
    }
}
