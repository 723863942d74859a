//! Reference angular-velocity profiles for tracking runs.
//!
//! The reference is a virtual rigid body: its attitude is integrated with the
//! same Lie-group scheme as the agents, while its body angular velocity
//! follows a closed-form profile so that the acceleration the tracking
//! controller feeds forward is analytic rather than differenced.

use crate::so3::Vec3;
use std::f64::consts::TAU;

/// Per-axis phase of a sinusoidal profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Waveform {
    Sin,
    Cos,
}

/// A closed-form body angular-velocity profile ω_r(t) with analytic ω̇_r(t).
#[derive(Clone, Debug)]
pub enum ReferenceMotion {
    /// ω_r,k(t) = amplitude_k · wave_k(2πt / period), axis by axis.
    Sinusoid {
        /// Per-axis amplitude in rad/s.
        amplitude: Vec3,
        /// Common period in seconds (strictly positive).
        period: f64,
        /// Per-axis choice of sine or cosine phase.
        waveform: [Waveform; 3],
    },
    /// Constant spin; ω̇_r ≡ 0.
    Constant { omega: Vec3 },
}

impl ReferenceMotion {
    /// The profile value ω_r(t) in rad/s.
    pub fn omega_at(&self, t: f64) -> Vec3 {
        match self {
            ReferenceMotion::Sinusoid {
                amplitude,
                period,
                waveform,
            } => {
                let phase = TAU * t / period;
                Vec3::new(
                    amplitude[0] * waveform[0].eval(phase),
                    amplitude[1] * waveform[1].eval(phase),
                    amplitude[2] * waveform[2].eval(phase),
                )
            }
            ReferenceMotion::Constant { omega } => *omega,
        }
    }

    /// The analytic derivative ω̇_r(t) in rad/s².
    pub fn omega_dot_at(&self, t: f64) -> Vec3 {
        match self {
            ReferenceMotion::Sinusoid {
                amplitude,
                period,
                waveform,
            } => {
                let rate = TAU / period;
                let phase = rate * t;
                Vec3::new(
                    amplitude[0] * rate * waveform[0].eval_derivative(phase),
                    amplitude[1] * rate * waveform[1].eval_derivative(phase),
                    amplitude[2] * rate * waveform[2].eval_derivative(phase),
                )
            }
            ReferenceMotion::Constant { .. } => Vec3::zeros(),
        }
    }
}

impl Waveform {
    fn eval(self, phase: f64) -> f64 {
        match self {
            Waveform::Sin => phase.sin(),
            Waveform::Cos => phase.cos(),
        }
    }

    fn eval_derivative(self, phase: f64) -> f64 {
        match self {
            Waveform::Sin => phase.cos(),
            Waveform::Cos => -phase.sin(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bench_profile() -> ReferenceMotion {
        // 10°/s amplitude on each axis, 8 s period, sin/cos/sin phases.
        let a = 10.0_f64.to_radians();
        ReferenceMotion::Sinusoid {
            amplitude: Vec3::new(a, a, a),
            period: 8.0,
            waveform: [Waveform::Sin, Waveform::Cos, Waveform::Sin],
        }
    }

    #[test]
    fn sinusoid_hits_known_samples() {
        let profile = bench_profile();
        let ten = 10.0_f64.to_radians();
        // t = 0: sine axes are zero, cosine axis at full amplitude.
        assert_abs_diff_eq!(
            profile.omega_at(0.0),
            Vec3::new(0.0, ten, 0.0),
            epsilon = 1e-15
        );
        // Quarter period: phases swap.
        assert_abs_diff_eq!(
            profile.omega_at(2.0),
            Vec3::new(ten, 0.0, ten),
            epsilon = 1e-15
        );
        // Full period returns to the start.
        assert_abs_diff_eq!(profile.omega_at(8.0), profile.omega_at(0.0), epsilon = 1e-14);
    }

    #[test]
    fn sinusoid_derivative_matches_finite_difference() {
        let profile = bench_profile();
        let h = 1e-6;
        for &t in &[0.0, 0.31, 1.7, 4.0, 7.93] {
            let fd = (profile.omega_at(t + h) - profile.omega_at(t - h)) / (2.0 * h);
            assert_abs_diff_eq!(profile.omega_dot_at(t), fd, epsilon = 1e-9);
        }
    }

    #[test]
    fn constant_profile_has_zero_acceleration() {
        let profile = ReferenceMotion::Constant {
            omega: Vec3::new(0.1, -0.2, 0.05),
        };
        assert_abs_diff_eq!(
            profile.omega_at(3.7),
            Vec3::new(0.1, -0.2, 0.05),
            epsilon = 0.0
        );
        assert_abs_diff_eq!(profile.omega_dot_at(3.7), Vec3::zeros(), epsilon = 0.0);
    }
}
