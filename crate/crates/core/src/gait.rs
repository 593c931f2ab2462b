//! Hand-built cyclic walking gait used as the tracking target.
//!
//! The trajectory is two half-cycle segments of joint-angle frames at 120 Hz,
//! one per foot, each starting at that foot's touchdown pose. Frames come
//! from two-link inverse kinematics tracking a constant-velocity stance ankle
//! and a sinusoidal swing arc, with the ankle holding the sole level. A
//! cursor walks the frames; in linked mode a touchdown restarts the cursor at
//! the matching segment, in the unlinked ablation the segments simply
//! alternate on their own clock.

use crate::error::{Error, Result};
use crate::math::{Rot2, Vec2};

/// Which foot a segment or contact event belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Foot {
    Right,
    Left,
}

/// Gait construction parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GaitParams {
    /// Forward travel per step (m).
    pub step_length: f64,
    /// Peak swing-foot lift (m).
    pub step_height: f64,
    /// Full gait cycle duration, two steps (s).
    pub cycle_s: f64,
    /// Ankle depth below the hip during stance (m).
    pub stance_depth: f64,
    /// Thigh and shank lengths (m).
    pub thigh: f64,
    pub shank: f64,
    /// Frame rate the segments are sampled at (Hz).
    pub rate_hz: f64,
}

impl Default for GaitParams {
    fn default() -> Self {
        GaitParams {
            step_length: 0.5,
            step_height: 0.08,
            cycle_s: 1.0,
            stance_depth: 0.75,
            thigh: 0.4,
            shank: 0.4,
            rate_hz: 120.0,
        }
    }
}

/// Joint targets for one frame: `[hip_r, knee_r, ankle_r, hip_l, knee_l, ankle_l]`.
pub type Frame = [f64; 6];

/// The full target trajectory.
#[derive(Debug, Clone)]
pub struct TargetTrajectory {
    /// Frames starting at the right foot's touchdown (right = stance).
    pub right_segment: Vec<Frame>,
    /// Frames starting at the left foot's touchdown (left = stance).
    pub left_segment: Vec<Frame>,
    /// Nominal cycle duration (s).
    pub cycle_s: f64,
    /// Nominal forward speed (m/s).
    pub nominal_speed: f64,
}

/// Two-link IK: hip and knee angles reaching `target` (ankle position
/// relative to the hip, x forward, z up). The knee bends backward.
pub fn leg_ik(target: Vec2, thigh: f64, shank: f64) -> Result<(f64, f64)> {
    let r2 = target.dot(target);
    let r = r2.sqrt();
    if r > thigh + shank - 1e-6 {
        return Err(Error::InvalidInput(format!(
            "IK target {:.3} m exceeds leg reach {:.3} m",
            r,
            thigh + shank
        )));
    }
    let cos_k = ((r2 - thigh * thigh - shank * shank) / (2.0 * thigh * shank)).clamp(-1.0, 1.0);
    let knee = -cos_k.acos();
    let u = Vec2::new(shank * knee.sin(), -thigh - shank * knee.cos());
    let hip = f64::atan2(target.x, -target.z) - f64::atan2(u.x, -u.z);
    Ok((hip, knee))
}

/// Forward kinematics of one leg: ankle position relative to the hip.
pub fn leg_fk(hip: f64, knee: f64, thigh: f64, shank: f64) -> Vec2 {
    let knee_pos = Rot2::new(hip).apply(Vec2::new(0.0, -thigh));
    knee_pos + Rot2::new(hip + knee).apply(Vec2::new(0.0, -shank))
}

/// Construct the walking trajectory. Errors if the requested step is outside
/// the leg's reach.
pub fn builtin_walk_trajectory(p: &GaitParams) -> Result<TargetTrajectory> {
    if p.step_length <= 0.0 || p.step_height <= 0.0 || p.cycle_s <= 0.0 {
        return Err(Error::InvalidInput("gait parameters must be positive".into()));
    }
    let frames_per_segment = (p.rate_hz * p.cycle_s / 2.0).round() as usize;
    if frames_per_segment < 2 {
        return Err(Error::InvalidInput("cycle too short for the frame rate".into()));
    }
    let half = p.step_length / 2.0;
    let mut stance_swing = Vec::with_capacity(frames_per_segment);
    for k in 0..frames_per_segment {
        let phase = k as f64 / frames_per_segment as f64;
        // stance ankle sweeps backward under the hip at constant speed
        let stance = Vec2::new(half - p.step_length * phase, -p.stance_depth);
        // swing ankle arcs forward with a sinusoidal lift
        let swing = Vec2::new(
            -half * (std::f64::consts::PI * phase).cos(),
            -p.stance_depth + p.step_height * (std::f64::consts::PI * phase).sin(),
        );
        let (hip_st, knee_st) = leg_ik(stance, p.thigh, p.shank)?;
        let (hip_sw, knee_sw) = leg_ik(swing, p.thigh, p.shank)?;
        // ankle keeps the sole level with the base
        let leg_st = [hip_st, knee_st, -(hip_st + knee_st)];
        let leg_sw = [hip_sw, knee_sw, -(hip_sw + knee_sw)];
        stance_swing.push((leg_st, leg_sw));
    }
    let right_segment: Vec<Frame> = stance_swing
        .iter()
        .map(|(st, sw)| [st[0], st[1], st[2], sw[0], sw[1], sw[2]])
        .collect();
    let left_segment: Vec<Frame> = stance_swing
        .iter()
        .map(|(st, sw)| [sw[0], sw[1], sw[2], st[0], st[1], st[2]])
        .collect();
    Ok(TargetTrajectory {
        right_segment,
        left_segment,
        cycle_s: p.cycle_s,
        nominal_speed: 2.0 * p.step_length / p.cycle_s,
    })
}

impl TargetTrajectory {
    pub fn segment(&self, foot: Foot) -> &[Frame] {
        match foot {
            Foot::Right => &self.right_segment,
            Foot::Left => &self.left_segment,
        }
    }
}

/// Playback position within the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectoryCursor {
    pub segment: Foot,
    pub frame: usize,
    /// Linked cursors restart at the matching segment on every touchdown;
    /// unlinked cursors free-run and alternate segments on their own.
    pub linked: bool,
}

impl TrajectoryCursor {
    pub fn new(linked: bool) -> Self {
        TrajectoryCursor { segment: Foot::Right, frame: 0, linked }
    }

    /// Touchdown event of `foot`. Linked mode restarts the matching segment
    /// (also on repeated touchdowns of the same foot); unlinked mode ignores
    /// the event entirely.
    pub fn on_foot_contact(&mut self, foot: Foot) {
        if self.linked {
            self.segment = foot;
            self.frame = 0;
        }
    }

    /// Advance one control step. Wraps cyclically; in unlinked mode the wrap
    /// flips to the other foot's segment.
    pub fn advance(&mut self, traj: &TargetTrajectory) {
        let len = traj.segment(self.segment).len();
        self.frame += 1;
        if self.frame >= len {
            self.frame = 0;
            if !self.linked {
                self.segment = match self.segment {
                    Foot::Right => Foot::Left,
                    Foot::Left => Foot::Right,
                };
            }
        }
    }
}

/// Current frame's joint targets; a total lookup for any cursor state.
pub fn target_joints(traj: &TargetTrajectory, cursor: &TrajectoryCursor) -> Frame {
    let seg = traj.segment(cursor.segment);
    seg[cursor.frame.min(seg.len() - 1)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj() -> TargetTrajectory {
        builtin_walk_trajectory(&GaitParams::default()).unwrap()
    }

    #[test]
    fn ik_fk_round_trip() {
        let p = GaitParams::default();
        for (x, z) in [(0.2, -0.7), (-0.25, -0.72), (0.0, -0.75), (0.1, -0.6)] {
            let t = Vec2::new(x, z);
            let (hip, knee) = leg_ik(t, p.thigh, p.shank).unwrap();
            let back = leg_fk(hip, knee, p.thigh, p.shank);
            assert!((back - t).norm() < 1e-9, "({x},{z}) -> {back:?}");
            assert!(knee <= 1e-12, "knee must bend backward");
        }
    }

    #[test]
    fn ik_rejects_unreachable_targets() {
        assert!(leg_ik(Vec2::new(0.0, -0.9), 0.4, 0.4).is_err());
        assert!(builtin_walk_trajectory(&GaitParams {
            step_length: 2.5,
            ..GaitParams::default()
        })
        .is_err());
    }

    #[test]
    fn segments_mirror_each_other() {
        let t = traj();
        assert_eq!(t.right_segment.len(), t.left_segment.len());
        for k in 0..t.right_segment.len() {
            let r = t.right_segment[k];
            let l = t.left_segment[k];
            for j in 0..3 {
                assert!((r[j] - l[3 + j]).abs() <= 1e-6);
                assert!((r[3 + j] - l[j]).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn swing_foot_advances_one_step_length_via_fk() {
        let p = GaitParams::default();
        let t = traj();
        // swing leg of the right segment is the left leg
        let first = t.right_segment[0];
        let start = leg_fk(first[3], first[4], p.thigh, p.shank);
        // touchdown pose is frame 0 of the opposite segment's stance leg
        let land = t.left_segment[0];
        let end = leg_fk(land[3], land[4], p.thigh, p.shank);
        assert!((end.x - start.x - p.step_length).abs() < 1e-6);
    }

    #[test]
    fn frames_respect_biped_joint_limits() {
        use crate::model::{BipedModel, Morphology};
        let model = BipedModel::new(&Morphology::default()).unwrap();
        let t = traj();
        for seg in [&t.right_segment, &t.left_segment] {
            for f in seg.iter() {
                for (j, link) in model.tree.links.iter().enumerate() {
                    assert!(
                        f[j] >= link.joint_min - 1e-9 && f[j] <= link.joint_max + 1e-9,
                        "joint {j} = {} outside [{}, {}]",
                        f[j],
                        link.joint_min,
                        link.joint_max
                    );
                }
            }
        }
    }

    #[test]
    fn nominal_speed_is_one_meter_per_second() {
        assert!((traj().nominal_speed - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linked_touchdown_restarts_matching_segment() {
        let t = traj();
        let mut c = TrajectoryCursor::new(true);
        for _ in 0..17 {
            c.advance(&t);
        }
        c.on_foot_contact(Foot::Left);
        assert_eq!(c.segment, Foot::Left);
        assert_eq!(c.frame, 0);
        // a stumble: same foot lands twice — reset both times
        for _ in 0..5 {
            c.advance(&t);
        }
        c.on_foot_contact(Foot::Left);
        assert_eq!((c.segment, c.frame), (Foot::Left, 0));
    }

    #[test]
    fn unlinked_cursor_ignores_touchdowns_and_alternates() {
        let t = traj();
        let mut c = TrajectoryCursor::new(false);
        for _ in 0..7 {
            c.advance(&t);
        }
        let before = c;
        c.on_foot_contact(Foot::Left);
        assert_eq!(c, before);
        // run to the end of the right segment: flips to left
        let len = t.right_segment.len();
        for _ in 0..(len - 7) {
            c.advance(&t);
        }
        assert_eq!(c.segment, Foot::Left);
        assert_eq!(c.frame, 0);
    }

    #[test]
    fn full_cycle_of_advances_returns_to_start_phase() {
        let t = traj();
        let mut c = TrajectoryCursor::new(false);
        let start = c;
        for _ in 0..120 {
            c.advance(&t);
        }
        assert_eq!(c, start);
    }

    #[test]
    fn frame_wraps_at_segment_end() {
        let t = traj();
        let mut c = TrajectoryCursor::new(true);
        c.frame = t.right_segment.len() - 1;
        c.advance(&t);
        assert_eq!(c.frame, 0);
        assert_eq!(c.segment, Foot::Right, "linked cursor wraps within its segment");
    }

    #[test]
    fn target_lookup_is_exact_and_total() {
        let t = traj();
        let c = TrajectoryCursor::new(true);
        assert_eq!(target_joints(&t, &c), t.right_segment[0]);
        let c2 = TrajectoryCursor { segment: Foot::Left, frame: 9999, linked: false };
        let _ = target_joints(&t, &c2); // clamped, never panics
    }
}
