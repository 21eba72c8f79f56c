//! Bounded disturbances and their effect on the measured navigation variables.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Result};
use crate::kinematics::nav_unchecked;
use crate::types::{wrap, NoiseBounds, Pose};

/// One realization of the five disturbances.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseSample {
    pub eps_x: f64,
    pub eps_y: f64,
    pub eps_theta: f64,
    pub eps_v: f64,
    pub eps_omega: f64,
}

impl NoiseSample {
    pub fn within(&self, bounds: &NoiseBounds) -> bool {
        self.eps_x.abs() <= bounds.eps_x_max
            && self.eps_y.abs() <= bounds.eps_y_max
            && self.eps_theta.abs() <= bounds.eps_theta_max
            && self.eps_v.abs() <= bounds.eps_v_max
            && self.eps_omega.abs() <= bounds.eps_omega_max
    }
}

/// Navigation variables seen through the corrupted pose estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasuredNavState {
    pub rho_m: f64,
    pub alpha_m: f64,
    pub beta_m: f64,
    pub theta_m: f64,
}

impl MeasuredNavState {
    /// A noise-free measurement of `nav`.
    pub fn exact(nav: &crate::types::NavState) -> Self {
        Self {
            rho_m: nav.rho,
            alpha_m: nav.alpha,
            beta_m: nav.beta,
            theta_m: nav.theta(),
        }
    }

    /// Heading estimate recovered as `beta_m − alpha_m`.
    pub fn heading(&self) -> f64 {
        wrap(self.beta_m - self.alpha_m)
    }
}

/// Reproducible stream of [`NoiseSample`]s.
///
/// Campaign run `i` uses ChaCha8 seeded with the master seed on stream `i`,
/// so every run owns an independent sequence that does not depend on how
/// runs are scheduled.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    rng: ChaCha8Rng,
}

impl NoiseStream {
    pub fn new(seed: u64) -> Self {
        Self::for_run(seed, 0)
    }

    pub fn for_run(master_seed: u64, run_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(run_index);
        Self { rng }
    }

    /// Uniform draw on `[−max, max)`; always consumes one value.
    #[inline]
    fn symmetric(&mut self, max: f64) -> f64 {
        let u: f64 = self.rng.random();
        max * (2.0 * u - 1.0)
    }

    pub fn draw(&mut self, bounds: &NoiseBounds) -> NoiseSample {
        NoiseSample {
            eps_x: self.symmetric(bounds.eps_x_max),
            eps_y: self.symmetric(bounds.eps_y_max),
            eps_theta: self.symmetric(bounds.eps_theta_max),
            eps_v: self.symmetric(bounds.eps_v_max),
            eps_omega: self.symmetric(bounds.eps_omega_max),
        }
    }
}

pub fn draw_sample(bounds: &NoiseBounds, stream: &mut NoiseStream) -> NoiseSample {
    stream.draw(bounds)
}

/// Corrupts the pose by `(ε_X, ε_Y, ε_θ)` and re-derives the navigation
/// variables from the corrupted pose. The differences to the true values are
/// the propagated errors `ε_ρ`, `ε_α` and `ε_β = ε_α + ε_θ`.
pub fn measure(true_pose: &Pose, goal: &Pose, sample: &NoiseSample) -> Result<MeasuredNavState> {
    ensure_finite("pose.x", true_pose.x)?;
    ensure_finite("pose.y", true_pose.y)?;
    ensure_finite("pose.theta", true_pose.theta)?;
    ensure_finite("goal.x", goal.x)?;
    ensure_finite("goal.y", goal.y)?;
    Ok(measure_unchecked(true_pose, goal, sample))
}

#[inline]
pub(crate) fn measure_unchecked(true_pose: &Pose, goal: &Pose, sample: &NoiseSample) -> MeasuredNavState {
    let theta_m = wrap(true_pose.theta + sample.eps_theta);
    let nav = nav_unchecked(true_pose.x + sample.eps_x, true_pose.y + sample.eps_y, theta_m, goal);
    MeasuredNavState {
        rho_m: nav.rho,
        alpha_m: nav.alpha,
        beta_m: nav.beta,
        theta_m,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::to_nav_state;
    use approx::assert_relative_eq;

    fn target() -> Pose {
        Pose::new(1.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn zero_bounds_give_zero_sample() {
        let mut s = NoiseStream::new(7);
        for _ in 0..100 {
            assert_eq!(s.draw(&NoiseBounds::zero()), NoiseSample::default());
        }
    }

    #[test]
    fn lab_bounds_respected() {
        let bounds = NoiseBounds::lab();
        let mut s = NoiseStream::new(11);
        for _ in 0..100_000 {
            assert!(s.draw(&bounds).within(&bounds));
        }
    }

    #[test]
    fn seeded_streams_repeat() {
        let bounds = NoiseBounds::lab();
        let a: Vec<_> = {
            let mut s = NoiseStream::for_run(42, 3);
            (0..50).map(|_| s.draw(&bounds)).collect()
        };
        let b: Vec<_> = {
            let mut s = NoiseStream::for_run(42, 3);
            (0..50).map(|_| s.draw(&bounds)).collect()
        };
        assert_eq!(a, b);
        let mut other = NoiseStream::for_run(42, 4);
        assert_ne!(a[0], other.draw(&bounds));
    }

    #[test]
    fn zero_sample_is_exact() {
        let pose = Pose::new(-2.0, -5.5, 0.5).unwrap();
        let m = measure(&pose, &Pose::origin(), &NoiseSample::default()).unwrap();
        let n = to_nav_state(&pose, &Pose::origin()).unwrap();
        assert_eq!(m, MeasuredNavState::exact(&n));
    }

    #[test]
    fn position_noise_example() {
        let sample = NoiseSample {
            eps_x: 0.3,
            ..Default::default()
        };
        let m = measure(&Pose::origin(), &target(), &sample).unwrap();
        assert_relative_eq!(m.rho_m, 0.7);
        assert_eq!((m.alpha_m, m.beta_m), (0.0, 0.0));
    }

    #[test]
    fn heading_noise_example() {
        let sample = NoiseSample {
            eps_theta: 0.17,
            ..Default::default()
        };
        let m = measure(&Pose::origin(), &target(), &sample).unwrap();
        assert_eq!(m.rho_m, 1.0);
        assert_relative_eq!(m.alpha_m, -0.17);
        assert_eq!(m.beta_m, 0.0);
        assert_eq!(m.theta_m, 0.17);
    }

    #[test]
    fn measure_rejects_non_finite() {
        let bad = Pose {
            x: f64::INFINITY,
            y: 0.0,
            theta: 0.0,
        };
        assert!(measure(&bad, &target(), &NoiseSample::default()).is_err());
    }
}
