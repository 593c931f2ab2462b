//! Assistance forces: a PD controller on the base (the "gantry") and a PD
//! controller per joint tracking the target gait, both scaled by a decaying
//! multiplier. The forward DOF tracks velocity only — the gantry drags the
//! robot along at the target speed without pinning its x position.

use crate::error::{Error, Result};

/// PD gains for both controllers.
#[derive(Debug, Clone, PartialEq)]
pub struct GuideGains {
    /// Base proportional gains `(x, z, pitch)`; the x entry is ignored
    /// (velocity-only tracking in x).
    pub kp_com: [f64; 3],
    /// Base derivative gains `(x, z, pitch)`.
    pub kd_com: [f64; 3],
    /// Joint proportional gain (N·m/rad), applied per joint.
    pub kp_joint: f64,
    /// Joint derivative gain (N·m·s/rad).
    pub kd_joint: f64,
}

impl Default for GuideGains {
    fn default() -> Self {
        GuideGains {
            kp_com: [0.0, 2000.0, 400.0],
            kd_com: [300.0, 300.0, 60.0],
            kp_joint: 400.0,
            kd_joint: 4.0,
        }
    }
}

/// How the guide multiplier decays across Stage 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayMode {
    /// Multiply by the decay factor when the success criterion fires.
    SuccessGated,
    /// Multiply by the per-episode factor at every episode end.
    Continuous,
}

/// Current assistance level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuideLevel {
    /// Multiplier in (0, 1].
    pub f: f64,
    pub mode: DecayMode,
    /// When false, only the base controller runs (CoM-only ablation).
    pub joints_enabled: bool,
}

impl GuideLevel {
    pub fn full(mode: DecayMode, joints_enabled: bool) -> Self {
        GuideLevel { f: 1.0, mode, joints_enabled }
    }

    /// One success-gated decay step: `f ← 0.65 f`.
    pub fn decay(&mut self, factor: f64) -> Result<()> {
        if self.mode != DecayMode::SuccessGated {
            return Err(Error::Contract("success-gated decay invoked in continuous mode".into()));
        }
        self.f *= factor;
        Ok(())
    }

    /// One per-episode decay step: `f ← 0.995 f`.
    pub fn decay_continuous(&mut self, factor: f64) -> Result<()> {
        if self.mode != DecayMode::Continuous {
            return Err(Error::Contract("continuous decay invoked in success-gated mode".into()));
        }
        self.f *= factor;
        Ok(())
    }
}

/// Base pose/velocity targets, fixed for an episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComTargets {
    /// Forward speed target (m/s).
    pub vx: f64,
    /// Base height target (m).
    pub z: f64,
    /// Pitch target (rad).
    pub pitch: f64,
}

impl Default for ComTargets {
    fn default() -> Self {
        ComTargets { vx: 1.0, z: 0.8, pitch: 0.0 }
    }
}

/// Base assistance wrench `[Fx, Fz, τ_pitch]`: per-DOF PD error scaled by the
/// guide multiplier. The x DOF uses the velocity term only.
pub fn com_guide_force(
    gains: &GuideGains,
    level: &GuideLevel,
    targets: &ComTargets,
    base_pose: [f64; 3],  // (x, z, pitch)
    base_vel: [f64; 3],   // (vx, vz, pitch rate)
) -> [f64; 3] {
    let pos_err = [0.0, targets.z - base_pose[1], targets.pitch - base_pose[2]];
    let vel_err = [targets.vx - base_vel[0], -base_vel[1], -base_vel[2]];
    let mut out = [0.0; 3];
    for k in 0..3 {
        let kp = if k == 0 { 0.0 } else { gains.kp_com[k] };
        out[k] = level.f * (kp * pos_err[k] + gains.kd_com[k] * vel_err[k]);
    }
    out
}

/// Joint assistance torques tracking the target frame with zero target
/// velocities. Returns zeros when joint guidance is disabled.
pub fn joint_guide_torques(
    gains: &GuideGains,
    level: &GuideLevel,
    target: &[f64; 6],
    joints: &[f64],
    joint_vels: &[f64],
) -> [f64; 6] {
    let mut out = [0.0; 6];
    if !level.joints_enabled {
        return out;
    }
    for j in 0..6 {
        out[j] = level.f * (gains.kp_joint * (target[j] - joints[j]) - gains.kd_joint * joint_vels[j]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn level(f: f64) -> GuideLevel {
        GuideLevel { f, mode: DecayMode::SuccessGated, joints_enabled: true }
    }

    #[test]
    fn on_target_means_zero_wrench() {
        let t = ComTargets::default();
        let w = com_guide_force(&GuideGains::default(), &level(1.0), &t, [5.3, 0.8, 0.0], [1.0, 0.0, 0.0]);
        assert_eq!(w, [0.0; 3]);
    }

    #[test]
    fn stationary_robot_feels_forward_pull() {
        let mut gains = GuideGains::default();
        gains.kd_com[0] = 200.0;
        let w = com_guide_force(&gains, &level(1.0), &ComTargets::default(), [0.0, 0.8, 0.0], [0.0, 0.0, 0.0]);
        assert!((w[0] - 200.0).abs() < 1e-12);
    }

    #[test]
    fn x_position_is_never_tracked() {
        let mut gains = GuideGains::default();
        gains.kp_com[0] = 1e9; // must be ignored
        let w = com_guide_force(&gains, &level(1.0), &ComTargets::default(), [-100.0, 0.8, 0.0], [1.0, 0.0, 0.0]);
        assert_eq!(w[0], 0.0);
    }

    #[test]
    fn outputs_scale_linearly_with_f() {
        let gains = GuideGains::default();
        let targets = ComTargets::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let pose = [rng.random_range(-1.0..1.0), rng.random_range(0.4..1.2), rng.random_range(-0.5..0.5)];
            let vel = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let f: f64 = rng.random_range(0.01..1.0);
            let full = com_guide_force(&gains, &level(1.0), &targets, pose, vel);
            let scaled = com_guide_force(&gains, &level(f), &targets, pose, vel);
            for k in 0..3 {
                assert!((scaled[k] - f * full[k]).abs() <= 1e-12 * (1.0 + full[k].abs()));
            }
            let joints: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            let vels: Vec<f64> = (0..6).map(|_| rng.random_range(-3.0..3.0)).collect();
            let target = [0.1, -0.4, 0.3, -0.2, -0.9, 0.6];
            let tf = joint_guide_torques(&gains, &level(1.0), &target, &joints, &vels);
            let ts = joint_guide_torques(&gains, &level(f), &target, &joints, &vels);
            for j in 0..6 {
                assert!((ts[j] - f * tf[j]).abs() <= 1e-12 * (1.0 + tf[j].abs()));
            }
        }
    }

    #[test]
    fn halving_f_halves_the_wrench_exactly() {
        let gains = GuideGains::default();
        let pose = [0.0, 0.6, 0.2];
        let vel = [0.3, -0.1, 0.4];
        let w1 = com_guide_force(&gains, &level(1.0), &ComTargets::default(), pose, vel);
        let w2 = com_guide_force(&gains, &level(0.5), &ComTargets::default(), pose, vel);
        for k in 0..3 {
            assert_eq!(w2[k], 0.5 * w1[k]);
        }
    }

    #[test]
    fn tracked_joints_feel_no_torque() {
        let target = [0.2, -0.5, 0.3, 0.2, -0.5, 0.3];
        let torques = joint_guide_torques(
            &GuideGains::default(),
            &level(0.8),
            &target,
            &target,
            &[0.0; 6],
        );
        assert_eq!(torques, [0.0; 6]);
    }

    #[test]
    fn joint_guidance_off_means_zero_regardless_of_error() {
        let mut l = level(1.0);
        l.joints_enabled = false;
        let torques = joint_guide_torques(
            &GuideGains::default(),
            &l,
            &[1.0; 6],
            &[-1.0; 6],
            &[5.0; 6],
        );
        assert_eq!(torques, [0.0; 6]);
    }

    #[test]
    fn single_joint_error_formula_spot_check() {
        let mut gains = GuideGains::default();
        gains.kp_joint = 60.0;
        gains.kd_joint = 0.0;
        let mut target = [0.0; 6];
        target[2] = 0.1;
        let torques = joint_guide_torques(&gains, &level(0.65), &target, &[0.0; 6], &[0.0; 6]);
        assert!((torques[2] - 3.9).abs() < 1e-12);
        for j in [0, 1, 3, 4, 5] {
            assert_eq!(torques[j], 0.0);
        }
    }

    #[test]
    fn success_gated_decay_chain_crosses_threshold_at_seven() {
        let mut l = GuideLevel::full(DecayMode::SuccessGated, true);
        for k in 1..=7 {
            l.decay(0.65).unwrap();
            let expect = 0.65f64.powi(k);
            assert!((l.f - expect).abs() < 1e-15);
        }
        assert!(l.f < 0.05);
        assert!(0.65f64.powi(6) >= 0.05);
    }

    #[test]
    fn continuous_decay_rate_matches_arithmetic() {
        let mut l = GuideLevel::full(DecayMode::Continuous, true);
        l.decay_continuous(0.995).unwrap();
        assert!((l.f - 0.995).abs() < 1e-15);
        for _ in 1..459 {
            l.decay_continuous(0.995).unwrap();
        }
        assert!((l.f - 0.1).abs() < 2e-3, "0.995^459 ≈ 0.1, got {}", l.f);
    }

    #[test]
    fn decay_mode_guards_are_enforced() {
        let mut gated = GuideLevel::full(DecayMode::SuccessGated, true);
        assert!(gated.decay_continuous(0.995).is_err());
        let mut cont = GuideLevel::full(DecayMode::Continuous, true);
        assert!(cont.decay(0.65).is_err());
    }
}
