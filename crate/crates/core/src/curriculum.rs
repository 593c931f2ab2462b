//! Three-stage training scheduler.
//!
//! Stage 1 ramps terrain difficulty 1→10, Stage 2 decays the guide forces,
//! Stage 3 ramps perturbation magnitude, then Done. Every advancement is
//! gated on the success criterion: three consecutive episodes reaching the
//! end of the course. Ablation flags can skip stages or switch Stage 2 to a
//! per-episode continuous decay.

use crate::error::Result;
use crate::guide::{DecayMode, GuideLevel};
use crate::model::{BipedModel, GeneralizedState};
use crate::terrain::Heightfield;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    Stage1,
    Stage2,
    Stage3,
    Done,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Phase::Stage1 => "stage1",
            Phase::Stage2 => "stage2",
            Phase::Stage3 => "stage3",
            Phase::Done => "done",
        };
        write!(f, "{s}")
    }
}

/// Scheduler knobs, including the ablation switches.
#[derive(Debug, Clone, PartialEq)]
pub struct CurriculumConfig {
    /// Terrain curriculum on/off ("No Stage 1" starts at max difficulty).
    pub stage1: bool,
    /// Guide curriculum on/off ("No Stage 2" never applies guide forces).
    pub stage2: bool,
    /// Perturbation curriculum on/off (off holds the magnitude at `p1`).
    pub stage3: bool,
    pub decay_mode: DecayMode,
    /// Joint guidance on/off (off = CoM-only ablation).
    pub guide_joints: bool,
    /// Success-gated decay factor per Stage 2 advancement.
    pub decay_factor: f64,
    /// Per-episode factor in continuous mode.
    pub continuous_factor: f64,
    /// Stage 2 completes when the multiplier drops below this.
    pub f_threshold: f64,
    /// Perturbation magnitudes (N) at the start and end of Stage 3.
    pub p1: f64,
    pub p_n: f64,
    /// Stage 3 ramp increments.
    pub p_steps: u32,
    /// Consecutive successes required per advancement.
    pub required_streak: u32,
    /// Highest terrain difficulty level.
    pub d_max: u32,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        CurriculumConfig {
            stage1: true,
            stage2: true,
            stage3: true,
            decay_mode: DecayMode::SuccessGated,
            guide_joints: true,
            decay_factor: 0.65,
            continuous_factor: 0.995,
            f_threshold: 0.05,
            p1: 50.0,
            p_n: 1000.0,
            p_steps: 10,
            required_streak: 3,
            d_max: 10,
        }
    }
}

/// Scheduler state; mutated only between episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CurriculumState {
    pub phase: Phase,
    /// Terrain difficulty level in 1..=d_max.
    pub d_index: u32,
    pub guide: GuideLevel,
    /// Current perturbation magnitude (N).
    pub p: f64,
    pub success_streak: u32,
    pub p_step: u32,
    pub config: CurriculumConfig,
}

impl CurriculumState {
    pub fn new(config: CurriculumConfig) -> Self {
        let phase = if config.stage1 {
            Phase::Stage1
        } else if config.stage2 {
            Phase::Stage2
        } else if config.stage3 {
            Phase::Stage3
        } else {
            Phase::Done
        };
        let guide = if config.stage2 {
            GuideLevel::full(config.decay_mode, config.guide_joints)
        } else {
            // forces never applied
            GuideLevel { f: 0.0, mode: config.decay_mode, joints_enabled: config.guide_joints }
        };
        CurriculumState {
            phase,
            d_index: if config.stage1 { 1 } else { config.d_max },
            guide,
            p: config.p1,
            success_streak: 0,
            p_step: 0,
            config,
        }
    }

    /// Active settings: (terrain difficulty, guide multiplier, perturbation N).
    pub fn current_settings(&self) -> (f64, f64, f64) {
        (self.d_index as f64, self.guide.f, self.p)
    }

    /// Fold one episode outcome into the schedule. Failures reset the streak;
    /// the third consecutive success advances the active stage one notch.
    /// Calling after Done is a no-op.
    pub fn record_episode(&mut self, outcome: &EpisodeOutcome) -> Result<()> {
        if self.phase == Phase::Done {
            return Ok(());
        }
        if outcome.success {
            self.success_streak += 1;
        } else {
            self.success_streak = 0;
        }
        let fired = self.success_streak >= self.config.required_streak;
        if fired {
            self.success_streak = 0;
        }
        match self.phase {
            Phase::Stage1 => {
                if fired {
                    self.d_index += 1;
                    if self.d_index >= self.config.d_max {
                        self.d_index = self.config.d_max;
                        self.enter_after_stage1();
                    }
                }
            }
            Phase::Stage2 => match self.guide.mode {
                DecayMode::SuccessGated => {
                    if fired {
                        self.guide.decay(self.config.decay_factor)?;
                        if self.guide.f < self.config.f_threshold {
                            self.enter_after_stage2();
                        }
                    }
                }
                DecayMode::Continuous => {
                    self.guide.decay_continuous(self.config.continuous_factor)?;
                    if self.guide.f < self.config.f_threshold {
                        self.enter_after_stage2();
                    }
                }
            },
            Phase::Stage3 => {
                if fired {
                    self.p_step += 1;
                    self.p = self.config.p1
                        + (self.config.p_n - self.config.p1) * self.p_step as f64
                            / self.config.p_steps as f64;
                    if self.p_step >= self.config.p_steps {
                        self.phase = Phase::Done;
                    }
                }
            }
            Phase::Done => unreachable!(),
        }
        Ok(())
    }

    fn enter_after_stage1(&mut self) {
        if self.config.stage2 {
            self.phase = Phase::Stage2;
        } else if self.config.stage3 {
            self.phase = Phase::Stage3;
        } else {
            self.phase = Phase::Done;
        }
    }

    fn enter_after_stage2(&mut self) {
        if self.config.stage3 {
            self.phase = Phase::Stage3;
        } else {
            self.phase = Phase::Done;
        }
    }
}

/// Why and how an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationReason {
    ReachedEnd,
    FellLow,
    PitchedOver,
    BodyContact,
    FellInGap,
    TimedOut,
    SimFault,
}

impl std::fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TerminationReason::ReachedEnd => "reached_end",
            TerminationReason::FellLow => "fell_low",
            TerminationReason::PitchedOver => "pitched_over",
            TerminationReason::BodyContact => "body_contact",
            TerminationReason::FellInGap => "fell_in_gap",
            TerminationReason::TimedOut => "timed_out",
            TerminationReason::SimFault => "sim_fault",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeOutcome {
    pub success: bool,
    /// Fraction of the course covered at termination, in [0, 1].
    pub distance_fraction: f64,
    pub reason: TerminationReason,
}

impl EpisodeOutcome {
    pub fn success_at_end() -> Self {
        EpisodeOutcome { success: true, distance_fraction: 1.0, reason: TerminationReason::ReachedEnd }
    }

    pub fn failure(fraction: f64, reason: TerminationReason) -> Self {
        EpisodeOutcome { success: false, distance_fraction: fraction.clamp(0.0, 1.0), reason }
    }
}

/// Episode termination thresholds; all invented plumbing, all configurable.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminationParams {
    /// Minimum base height above local ground (m).
    pub min_height: f64,
    /// Maximum |pitch| (rad).
    pub max_pitch: f64,
    /// Absolute base height that counts as having fallen into a gap (m).
    pub gap_fall_z: f64,
    /// Hard episode length cap (control steps).
    pub max_steps: u32,
}

impl Default for TerminationParams {
    fn default() -> Self {
        TerminationParams { min_height: 0.45, max_pitch: 1.0, gap_fall_z: -0.5, max_steps: 2000 }
    }
}

/// Check the episode for termination, evaluated once per control step.
pub fn episode_termination(
    model: &BipedModel,
    state: &GeneralizedState,
    fk: &crate::dynamics::FkResult,
    hf: &Heightfield,
    step_count: u32,
    start_x: f64,
    params: &TerminationParams,
) -> Option<EpisodeOutcome> {
    let x = state.q[0];
    let z = state.q[1];
    let pitch = state.q[2];
    if x >= hf.finish_x {
        return Some(EpisodeOutcome::success_at_end());
    }
    let fraction = (x - start_x) / (hf.finish_x - start_x);
    let fail = |reason| Some(EpisodeOutcome::failure(fraction, reason));

    if z < params.gap_fall_z {
        return fail(TerminationReason::FellInGap);
    }
    let (ground, _) = hf.height_at(x);
    if z - ground < params.min_height {
        return fail(TerminationReason::FellLow);
    }
    if pitch.abs() > params.max_pitch {
        return fail(TerminationReason::PitchedOver);
    }
    for probe in &model.fault_probes {
        let p = fk.point_pos(probe.body, probe.offset);
        let (h, _) = hf.height_at(p.x);
        if p.z < h {
            return fail(TerminationReason::BodyContact);
        }
    }
    if step_count > params.max_steps {
        return fail(TerminationReason::TimedOut);
    }
    None
}

/// Random base perturbation: with probability `rate·dt` per control step,
/// a wrench with each planar DOF drawn from `U(−p, p)` (the pitch component
/// scaled by the moment arm), applied for exactly one control step.
pub fn sample_perturbation(
    p: f64,
    rate_hz: f64,
    moment_arm: f64,
    dt: f64,
    rng: &mut ChaCha8Rng,
) -> Option<[f64; 3]> {
    if rng.random::<f64>() >= rate_hz * dt {
        return None;
    }
    if p <= 0.0 {
        return Some([0.0; 3]);
    }
    Some([
        rng.random_range(-p..p),
        rng.random_range(-p..p),
        moment_arm * rng.random_range(-p..p),
    ])
}
