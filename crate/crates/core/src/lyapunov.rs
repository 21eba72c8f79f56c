//! Lyapunov functions of the two regimes and their one-step differences.

use serde::{Deserialize, Serialize};

use crate::types::{wrap, NavState, Regime};

/// `½ρ² + ½α² + ½hβ²`.
pub fn v_global(nav: &NavState, h: f64) -> f64 {
    0.5 * (nav.rho * nav.rho + nav.alpha * nav.alpha + h * nav.beta * nav.beta)
}

/// `½ρ² + ½θ²` with `θ = β − α` wrapped.
pub fn v_local(nav: &NavState) -> f64 {
    let theta = nav.theta();
    0.5 * (nav.rho * nav.rho + theta * theta)
}

pub fn lyapunov_value(regime: Regime, nav: &NavState, h: f64) -> f64 {
    match regime {
        Regime::Global => v_global(nav, h),
        Regime::Local => v_local(nav),
    }
}

/// One-step change of a Lyapunov function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaV {
    /// `V(after) − V(before)`.
    pub exact: f64,
    /// Gradient form `ρΔρ + αΔα + hβΔβ` (or `ρΔρ + θΔθ` locally), which
    /// drops the quadratic increments.
    pub first_order: f64,
}

pub fn delta_v(before: &NavState, after: &NavState, which: Regime, h: f64) -> DeltaV {
    let d_rho = after.rho - before.rho;
    let first_order = match which {
        Regime::Global => {
            before.rho * d_rho
                + before.alpha * wrap(after.alpha - before.alpha)
                + h * before.beta * wrap(after.beta - before.beta)
        }
        Regime::Local => {
            let theta = before.theta();
            before.rho * d_rho + theta * wrap(after.theta() - theta)
        }
    };
    DeltaV {
        exact: lyapunov_value(which, after, h) - lyapunov_value(which, before, h),
        first_order,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovRecord {
    pub step_index: usize,
    pub regime: Regime,
    pub v: f64,
    pub delta_v: f64,
}
