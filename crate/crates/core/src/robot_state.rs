//! Proprioceptive state vector.
//!
//! Fixed 29-entry layout, consumed verbatim by the policy observation
//! (indices are load-bearing; tests pin them):
//!
//! | index | content                                             |
//! |-------|-----------------------------------------------------|
//! | 0..6  | joint angles `[hip_r, knee_r, ankle_r, hip_l, knee_l, ankle_l]` (rad) |
//! | 6..12 | joint velocities, same order (rad/s)                |
//! | 12..16| contact flags `[heel_r, toe_r, heel_l, toe_l]` ∈ {0,1} |
//! | 16..20| previous-step contact flags, same order             |
//! | 20..22| base linear velocity `(vx, vz)` (m/s)               |
//! | 22    | base pitch rate (rad/s)                             |
//! | 23    | base pitch (rad)                                    |
//! | 24    | base height above the ground directly below (m); over a gap this measures to the gap floor |
//! | 25..27| ankle forward offsets from the base `(x_r, x_l)` (m)|
//! | 27..29| swing-phase flags `(s_right, s_left)` ∈ {0,1}       |

use crate::dynamics::FkResult;
use crate::math::Vec2;
use crate::model::{BipedModel, GeneralizedState};

pub const ROBOT_STATE_LEN: usize = 29;

/// Which foot is currently in swing phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwingFlags {
    pub right: bool,
    pub left: bool,
}

/// Assemble the 29-entry robot state. `contacts`/`prev_contacts` follow the
/// model contact order; `ground_below_base` is the terrain height (gap floor
/// inside gaps) directly under the base.
pub fn extract_robot_state(
    model: &BipedModel,
    state: &GeneralizedState,
    fk: &FkResult,
    contacts: &[bool; 4],
    prev_contacts: &[bool; 4],
    swing: SwingFlags,
    ground_below_base: f64,
) -> [f64; ROBOT_STATE_LEN] {
    let mut out = [0.0; ROBOT_STATE_LEN];
    for j in 0..6 {
        out[j] = state.q[3 + j];
        out[6 + j] = state.qdot[3 + j];
    }
    for k in 0..4 {
        out[12 + k] = if contacts[k] { 1.0 } else { 0.0 };
        out[16 + k] = if prev_contacts[k] { 1.0 } else { 0.0 };
    }
    out[20] = state.qdot[0];
    out[21] = state.qdot[1];
    out[22] = state.qdot[2];
    out[23] = state.q[2];
    out[24] = state.q[1] - ground_below_base;
    let base_x = state.q[0];
    let ankle = |foot_body: usize| -> Vec2 { fk.pos[foot_body] };
    out[25] = ankle(model.foot_bodies[0]).x - base_x;
    out[26] = ankle(model.foot_bodies[1]).x - base_x;
    out[27] = if swing.right { 1.0 } else { 0.0 };
    out[28] = if swing.left { 1.0 } else { 0.0 };
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::forward_kinematics;
    use crate::model::Morphology;

    #[test]
    fn standing_at_rest_has_zero_velocities_and_full_contact() {
        let model = BipedModel::new(&Morphology::default()).unwrap();
        let mut s = GeneralizedState::zeros(9);
        s.q[1] = model.standing_height;
        let fk = forward_kinematics(&model.tree, &s).unwrap();
        let rs = extract_robot_state(
            &model,
            &s,
            &fk,
            &[true; 4],
            &[true; 4],
            SwingFlags { right: false, left: false },
            0.0,
        );
        for j in 6..12 {
            assert_eq!(rs[j], 0.0);
        }
        for k in 12..20 {
            assert_eq!(rs[k], 1.0);
        }
        assert!((rs[24] - model.standing_height).abs() < 1e-12);
        assert_eq!(rs[27], 0.0);
        assert_eq!(rs[28], 0.0);
    }

    #[test]
    fn previous_contacts_shift_through() {
        let model = BipedModel::new(&Morphology::default()).unwrap();
        let mut s = GeneralizedState::zeros(9);
        s.q[1] = 0.9;
        let fk = forward_kinematics(&model.tree, &s).unwrap();
        let c_now = [true, false, true, true];
        let c_prev = [false, false, true, false];
        let rs = extract_robot_state(
            &model,
            &s,
            &fk,
            &c_now,
            &c_prev,
            SwingFlags { right: true, left: false },
            0.0,
        );
        assert_eq!(&rs[12..16], &[1.0, 0.0, 1.0, 1.0]);
        assert_eq!(&rs[16..20], &[0.0, 0.0, 1.0, 0.0]);
        assert_eq!(rs[27], 1.0);
        assert_eq!(rs[28], 0.0);
    }
}
