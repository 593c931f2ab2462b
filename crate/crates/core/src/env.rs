//! Episode environment.
//!
//! Owns the simulator, the current terrain course, the gait cursor, and all
//! per-episode bookkeeping (contact history, swing flags, stride lengths, the
//! 20 Hz scan cache). One instance is strictly single-threaded; independent
//! instances share nothing.

use crate::contact::ContactParams;
use crate::curriculum::{episode_termination, sample_perturbation, EpisodeOutcome, TerminationParams, TerminationReason};
use crate::dynamics::{DynContext, FkResult};
use crate::error::{Error, Result};
use crate::gait::{builtin_walk_trajectory, target_joints, Foot, GaitParams, TargetTrajectory, TrajectoryCursor};
use crate::guide::{ComTargets, DecayMode, GuideGains, GuideLevel};
use crate::model::{BipedModel, GeneralizedState, Morphology};
use crate::reward::{compute_reward, RewardBreakdown, RewardInputs, RewardWeights};
use crate::robot_state::{extract_robot_state, SwingFlags, ROBOT_STATE_LEN};
use crate::sim::{ContinuousGuide, Simulator, StepInput, CONTROL_DT};
use crate::terrain::{generate, Heightfield, TerrainKind, TerrainParams, TerrainSpec, SCAN_LEN};
use rand_chacha::ChaCha8Rng;

/// Policy observation length: robot state plus terrain scan.
pub const OBS_LEN: usize = ROBOT_STATE_LEN + SCAN_LEN;
/// Scan refresh period in control steps (120 Hz / 6 = 20 Hz).
pub const SCAN_PERIOD: u32 = 6;

/// Everything that stays fixed across a run.
#[derive(Debug, Clone)]
pub struct EnvParams {
    pub morphology: Morphology,
    pub contact: ContactParams,
    pub terrain: TerrainParams,
    pub gait: GaitParams,
    pub guide_gains: GuideGains,
    pub com_targets: ComTargets,
    pub reward: RewardWeights,
    pub termination: TerminationParams,
    /// Perturbation trigger rate (Hz) and pitch moment arm (m).
    pub perturb_rate_hz: f64,
    pub perturb_arm: f64,
    /// Swing steps required before a touchdown edge counts.
    pub debounce_steps: u32,
    /// Target-trajectory linking (off = "no link" ablation).
    pub link_target: bool,
    /// Base spawn position inside the start zone (m).
    pub spawn_x: f64,
}

impl Default for EnvParams {
    fn default() -> Self {
        EnvParams {
            morphology: Morphology::default(),
            contact: ContactParams::default(),
            terrain: TerrainParams::default(),
            gait: GaitParams::default(),
            guide_gains: GuideGains::default(),
            com_targets: ComTargets::default(),
            reward: RewardWeights::default(),
            termination: TerminationParams::default(),
            perturb_rate_hz: 2.5,
            perturb_arm: 0.3,
            debounce_steps: 3,
            link_target: true,
            spawn_x: 1.0,
        }
    }
}

/// What varies per episode, handed down by the curriculum or the harness.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSettings {
    pub kind: TerrainKind,
    pub difficulty: f64,
    pub instances: usize,
    pub terrain_seed: u64,
    /// Guide multiplier; 0 disables assistance entirely.
    pub guide_f: f64,
    pub guide_joints: bool,
    /// Perturbation magnitude (N); 0 disables sampling output.
    pub perturb_p: f64,
}

/// One control step's outputs.
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    pub reward: RewardBreakdown,
    pub done: Option<EpisodeOutcome>,
}

pub struct Environment {
    pub params: EnvParams,
    pub model: BipedModel,
    sim: Simulator,
    traj: TargetTrajectory,
    cursor: TrajectoryCursor,
    hf: Heightfield,
    state: GeneralizedState,
    settings: EpisodeSettings,
    step_idx: u32,
    contacts: [bool; 4],
    prev_contacts: [bool; 4],
    swing: SwingFlags,
    airborne: [u32; 2],
    step_len: [f64; 2], // right, left
    last_touchdown_x: f64,
    scan: [f64; SCAN_LEN],
    start_x: f64,
    input: StepInput,
    ctx: DynContext,
    fk: FkResult,
}

impl Environment {
    pub fn new(params: EnvParams) -> Result<Self> {
        let model = BipedModel::new(&params.morphology)?;
        let sim = Simulator::for_biped(&model, params.contact.clone())?;
        // leg geometry of the gait must match the model
        let mut gait = params.gait.clone();
        gait.thigh = params.morphology.thigh_length;
        gait.shank = params.morphology.shank_length;
        let traj = builtin_walk_trajectory(&gait)?;
        let settings = EpisodeSettings {
            kind: TerrainKind::Flat,
            difficulty: 1.0,
            instances: 2,
            terrain_seed: 0,
            guide_f: 0.0,
            guide_joints: true,
            perturb_p: 0.0,
        };
        let hf = generate(
            &TerrainSpec { kind: settings.kind, difficulty: 1.0, instance_count: 2, seed: 0 },
            &params.terrain,
        )?;
        let cursor = TrajectoryCursor::new(params.link_target);
        let ctx = DynContext::new(&model.tree);
        let mut env = Environment {
            ctx,
            fk: FkResult::default(),
            model,
            sim,
            traj,
            cursor,
            hf,
            state: GeneralizedState::zeros(9),
            settings,
            step_idx: 0,
            contacts: [false; 4],
            prev_contacts: [false; 4],
            swing: SwingFlags { right: false, left: true },
            airborne: [0; 2],
            step_len: [0.0; 2],
            last_touchdown_x: 0.0,
            scan: [0.0; SCAN_LEN],
            start_x: params.spawn_x,
            input: StepInput::zeros(6),
            params,
        };
        let s = env.settings.clone();
        env.reset(&s)?;
        Ok(env)
    }

    /// Start a fresh episode under `settings`: new course, touchdown pose of
    /// the right segment, zero velocities.
    pub fn reset(&mut self, settings: &EpisodeSettings) -> Result<()> {
        self.hf = generate(
            &TerrainSpec {
                kind: settings.kind,
                difficulty: settings.difficulty,
                instance_count: settings.instances,
                seed: settings.terrain_seed,
            },
            &self.params.terrain,
        )?;
        self.settings = settings.clone();

        let frame = self.traj.right_segment[0];
        self.state = GeneralizedState::zeros(9);
        self.state.q[0] = self.params.spawn_x;
        for j in 0..6 {
            self.state.q[3 + j] = frame[j];
        }
        // drop the base so the lowest sole point rests on the ground
        self.refresh_fk();
        let mut lowest = f64::INFINITY;
        for cp in &self.model.contacts {
            let p = self.fk.point_pos(cp.body, cp.offset);
            let (ground, _) = self.hf.height_at(p.x);
            lowest = lowest.min(p.z - ground);
        }
        self.state.q[1] -= lowest;
        self.refresh_fk();

        self.cursor = TrajectoryCursor::new(self.params.link_target);
        self.step_idx = 0;
        let report = self.sim.measure_contacts(&self.state, &self.hf);
        let flags = report.flags();
        self.contacts = [flags[0], flags[1], flags[2], flags[3]];
        self.prev_contacts = self.contacts;
        self.swing = SwingFlags { right: false, left: true };
        self.airborne = [0; 2];
        self.step_len = [0.0; 2];
        self.last_touchdown_x = self.fk.pos[self.model.foot_bodies[0]].x;
        self.start_x = self.state.q[0];
        self.scan = self.hf.scan(self.state.q[0], self.state.q[1]);
        Ok(())
    }

    /// Advance one control step. `action` is the normalized policy output
    /// (clamped to [-1, 1] and scaled by the torque limits here);
    /// `perturb_rng` drives the perturbation sampler.
    pub fn step(&mut self, action: &[f64; 6], perturb_rng: &mut ChaCha8Rng) -> Result<StepOutcome> {
        let target = target_joints(&self.traj, &self.cursor);
        let mut wrench = [0.0; 3];
        if let Some(p) = sample_perturbation(
            self.settings.perturb_p,
            self.params.perturb_rate_hz,
            self.params.perturb_arm,
            CONTROL_DT,
            perturb_rng,
        ) {
            wrench = p;
        }
        self.input.continuous_guide = if self.settings.guide_f > 0.0 {
            Some(ContinuousGuide {
                gains: self.params.guide_gains.clone(),
                level: GuideLevel {
                    f: self.settings.guide_f,
                    mode: DecayMode::SuccessGated,
                    joints_enabled: self.settings.guide_joints,
                },
                com_targets: self.params.com_targets,
                target_joints: target,
            })
        } else {
            None
        };

        let limits = self.model.torque_limits();
        let mut clamped_action = [0.0; 6];
        for j in 0..6 {
            clamped_action[j] = action[j].clamp(-1.0, 1.0);
            self.input.joint_torques[j] = clamped_action[j] * limits[j];
            self.input.joint_guide[j] = 0.0;
        }
        self.input.base_wrench = wrench;

        let sim_result = self.sim.step(&mut self.state, &self.input, &self.hf, CONTROL_DT);
        self.step_idx += 1;

        let report = match sim_result {
            Ok(r) => r,
            Err(Error::SimFault(_)) => {
                let fraction = ((self.state.q[0] - self.start_x)
                    / (self.hf.finish_x - self.start_x))
                    .clamp(0.0, 1.0);
                let outcome = EpisodeOutcome::failure(fraction, TerminationReason::SimFault);
                let reward = RewardBreakdown {
                    goal: 0.0,
                    pos: 0.0,
                    vel: 0.0,
                    base: 0.0,
                    step: 0.0,
                    act: 0.0,
                    total: 0.0,
                };
                return Ok(StepOutcome { reward, done: Some(outcome) });
            }
            Err(e) => return Err(e),
        };

        self.refresh_fk();
        self.prev_contacts = self.contacts;
        let flags = report.flags();
        self.contacts = [flags[0], flags[1], flags[2], flags[3]];
        self.handle_touchdowns();
        self.cursor.advance(&self.traj);

        if self.step_idx % SCAN_PERIOD == 0 {
            self.scan = self.hf.scan(self.state.q[0], self.state.q[1]);
        }

        let (ground, _) = self.hf.height_at(self.state.q[0]);
        let inputs = RewardInputs {
            vx: self.state.qdot[0],
            joints: &self.state.q[3..9],
            joint_vels: &self.state.qdot[3..9],
            target_joints: &target,
            height: self.state.q[1] - ground,
            pitch: self.state.q[2],
            step_len_left: self.step_len[1],
            step_len_right: self.step_len[0],
            action: &clamped_action,
        };
        let reward = compute_reward(&self.params.reward, &inputs)?;

        let done = episode_termination(
            &self.model,
            &self.state,
            &self.fk,
            &self.hf,
            self.step_idx,
            self.start_x,
            &self.params.termination,
        );
        Ok(StepOutcome { reward, done })
    }

    /// Touchdown edges (debounced) restart the gait cursor, flip the swing
    /// flags, and record stride lengths.
    fn handle_touchdowns(&mut self) {
        for (fi, foot) in [(0usize, Foot::Right), (1usize, Foot::Left)] {
            let prev_any = self.prev_contacts[2 * fi] || self.prev_contacts[2 * fi + 1];
            let now_any = self.contacts[2 * fi] || self.contacts[2 * fi + 1];
            if now_any && !prev_any && self.airborne[fi] >= self.params.debounce_steps {
                self.cursor.on_foot_contact(foot);
                self.swing = match foot {
                    Foot::Right => SwingFlags { right: false, left: true },
                    Foot::Left => SwingFlags { right: true, left: false },
                };
                let foot_x = self.fk.pos[self.model.foot_bodies[fi]].x;
                self.step_len[fi] = foot_x - self.last_touchdown_x;
                self.last_touchdown_x = foot_x;
            }
            if now_any {
                self.airborne[fi] = 0;
            } else {
                self.airborne[fi] += 1;
            }
        }
    }

    /// Raw policy observation: 29 robot-state entries then the 24 cached scan
    /// samples.
    pub fn observation(&mut self) -> [f64; OBS_LEN] {
        let (ground, _) = self.hf.height_at(self.state.q[0]);
        self.refresh_fk();
        let rs = extract_robot_state(
            &self.model,
            &self.state,
            &self.fk,
            &self.contacts,
            &self.prev_contacts,
            self.swing,
            ground,
        );
        let mut obs = [0.0; OBS_LEN];
        obs[..ROBOT_STATE_LEN].copy_from_slice(&rs);
        obs[ROBOT_STATE_LEN..].copy_from_slice(&self.scan);
        obs
    }

    fn refresh_fk(&mut self) {
        self.ctx.fk_into(&self.model.tree, &self.state.q, &self.state.qdot, &mut self.fk);
    }

    pub fn state(&self) -> &GeneralizedState {
        &self.state
    }

    pub fn heightfield(&self) -> &Heightfield {
        &self.hf
    }

    pub fn settings(&self) -> &EpisodeSettings {
        &self.settings
    }

    pub fn swing_flags(&self) -> SwingFlags {
        self.swing
    }

    pub fn contacts(&self) -> [bool; 4] {
        self.contacts
    }

    pub fn step_index(&self) -> u32 {
        self.step_idx
    }

    pub fn distance_fraction(&self) -> f64 {
        ((self.state.q[0] - self.start_x) / (self.hf.finish_x - self.start_x)).clamp(0.0, 1.0)
    }

    pub fn target_frame(&self) -> [f64; 6] {
        target_joints(&self.traj, &self.cursor)
    }

    /// Test hook used by the evaluation harness's upper-bound double.
    pub fn force_base_x(&mut self, x: f64) {
        self.state.q[0] = x;
    }

    /// Measure contacts at the current state (no force application).
    pub fn measure_contact_report(&mut self) -> crate::contact::ContactReport {
        self.sim.measure_contacts(&self.state, &self.hf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    fn quiet_settings() -> EpisodeSettings {
        EpisodeSettings {
            kind: TerrainKind::Flat,
            difficulty: 1.0,
            instances: 2,
            terrain_seed: 3,
            guide_f: 1.0,
            guide_joints: true,
            perturb_p: 0.0,
        }
    }

    #[test]
    fn reset_spawns_on_the_ground_facing_forward() {
        let mut env = Environment::new(EnvParams::default()).unwrap();
        env.reset(&quiet_settings()).unwrap();
        let obs = env.observation();
        assert_eq!(obs.len(), OBS_LEN);
        // base above ground roughly at leg height
        assert!(obs[24] > 0.7 && obs[24] < 0.9, "h = {}", obs[24]);
        // left foot starts in swing
        assert_eq!(obs[27], 0.0);
        assert_eq!(obs[28], 1.0);
        for v in obs {
            assert!(v.is_finite());
        }
    }

    #[test]
    fn scan_cache_refreshes_at_twenty_hertz() {
        let mut env = Environment::new(EnvParams::default()).unwrap();
        let mut settings = quiet_settings();
        settings.kind = TerrainKind::Stairs;
        settings.difficulty = 6.0;
        env.reset(&settings).unwrap();
        let mut rng = stream_rng(0, Stream::Perturb);
        let mut last = env.observation()[ROBOT_STATE_LEN..].to_vec();
        let mut changes = Vec::new();
        for k in 1..=24u32 {
            env.step(&[0.0; 6], &mut rng).unwrap();
            let now = env.observation()[ROBOT_STATE_LEN..].to_vec();
            if now != last {
                changes.push(k);
            }
            last = now;
        }
        for k in &changes {
            assert_eq!(k % SCAN_PERIOD, 0, "scan changed at step {k}");
        }
        assert!(!changes.is_empty(), "the robot is towed forward, the scan must change");
    }

    #[test]
    fn guided_walking_succeeds_and_swing_flags_alternate() {
        // with full assistance the gantry carries an actionless robot across
        // the short flat training course
        let mut env = Environment::new(EnvParams::default()).unwrap();
        env.reset(&quiet_settings()).unwrap();
        let mut rng = stream_rng(1, Stream::Perturb);
        let mut exclusive_swing_seen = false;
        let outcome = loop {
            let out = env.step(&[0.0; 6], &mut rng).unwrap();
            let s = env.swing_flags();
            if s.right != s.left {
                exclusive_swing_seen = true;
            }
            if let Some(o) = out.done {
                break o;
            }
        };
        assert!(exclusive_swing_seen);
        assert!(
            outcome.success,
            "guided walk should reach the end, got {:?} at {:.0}%",
            outcome.reason,
            outcome.distance_fraction * 100.0
        );
    }

    #[test]
    fn joint_tracking_error_shrinks_under_pure_guidance() {
        let mut env = Environment::new(EnvParams::default()).unwrap();
        env.reset(&quiet_settings()).unwrap();
        let mut rng = stream_rng(2, Stream::Perturb);
        let mut action_rng = stream_rng(3, Stream::Policy);
        let err = |env: &mut Environment| -> f64 {
            let t = env.target_frame();
            let q = &env.state().q[3..9];
            t.iter().zip(q.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
        };
        // knock the joints well off target with a burst of strong random torques
        use rand::Rng;
        for _ in 0..45 {
            let sign: f64 = if action_rng.random::<bool>() { 1.0 } else { -1.0 };
            let a: [f64; 6] = std::array::from_fn(|_| sign * action_rng.random_range(0.5..1.0));
            env.step(&a, &mut rng).unwrap();
        }
        let disturbed = err(&mut env);
        // one second of pure guidance
        let mut late = 0.0;
        for k in 0..120 {
            env.step(&[0.0; 6], &mut rng).unwrap();
            if k >= 108 {
                late += err(&mut env) / 12.0;
            }
        }
        assert!(
            late < 0.75 * disturbed && late < 0.6,
            "tracking error should fall: disturbed {disturbed:.4}, settled {late:.4}"
        );
    }

    #[test]
    fn episode_is_deterministic_for_fixed_seed() {
        let run = || {
            let mut env = Environment::new(EnvParams::default()).unwrap();
            let mut settings = quiet_settings();
            settings.perturb_p = 80.0;
            env.reset(&settings).unwrap();
            let mut rng = stream_rng(42, Stream::Perturb);
            let mut total = 0.0;
            for _ in 0..400 {
                let out = env.step(&[0.1, -0.05, 0.02, -0.1, 0.05, 0.0], &mut rng).unwrap();
                total += out.reward.total;
                if out.done.is_some() {
                    break;
                }
            }
            (total, env.state().clone())
        };
        let a = run();
        let b = run();
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn observations_stay_finite_over_long_rollouts() {
        let mut env = Environment::new(EnvParams::default()).unwrap();
        let mut settings = quiet_settings();
        settings.kind = TerrainKind::Hurdles;
        settings.difficulty = 4.0;
        settings.perturb_p = 50.0;
        env.reset(&settings).unwrap();
        let mut rng = stream_rng(5, Stream::Perturb);
        let mut policy_rng = stream_rng(6, Stream::Policy);
        use rand::Rng;
        for _ in 0..600 {
            let action: [f64; 6] = std::array::from_fn(|_| policy_rng.random_range(-1.0..1.0));
            let out = env.step(&action, &mut rng).unwrap();
            for v in env.observation() {
                assert!(v.is_finite());
            }
            if out.done.is_some() {
                env.reset(&settings).unwrap();
            }
        }
    }
}
