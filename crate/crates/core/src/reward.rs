//! Six-term shaped reward: five exponentially-shaped tracking terms plus a
//! quadratic action penalty. Each shaped term is `w · exp(−c · e)` with a
//! squared-L2 error `e`; the action term is `w_act · Σ a²` with a negative
//! weight. The breakdown always sums to the total in a fixed order.

use crate::error::{Error, Result};

/// Term weights `w` and error scales `c`. The shaped-term weights are
/// positive; `w_act` is negative by convention.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardWeights {
    pub w_goal: f64,
    pub w_pos: f64,
    pub w_vel: f64,
    pub w_base: f64,
    pub w_step: f64,
    pub w_act: f64,
    pub c_goal: f64,
    pub c_pos: f64,
    pub c_vel: f64,
    pub c_base: f64,
    pub c_step: f64,
    /// Forward speed target (m/s).
    pub target_speed: f64,
    /// Base height target above local ground (m).
    pub target_height: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            w_goal: 0.3,
            w_pos: 0.3,
            w_vel: 0.1,
            w_base: 0.2,
            w_step: 0.1,
            w_act: -0.001,
            c_goal: 2.0,
            c_pos: 2.0,
            c_vel: 0.1,
            c_base: 10.0,
            c_step: 5.0,
            target_speed: 1.0,
            target_height: 0.8,
        }
    }
}

impl RewardWeights {
    /// Sum of the shaped-term weights: the reward at zero error, zero action.
    pub fn shaped_sum(&self) -> f64 {
        self.w_goal + self.w_pos + self.w_vel + self.w_base + self.w_step
    }
}

/// Everything the reward reads at one control step.
#[derive(Debug, Clone, Copy)]
pub struct RewardInputs<'a> {
    /// Base forward velocity (m/s).
    pub vx: f64,
    pub joints: &'a [f64],
    pub joint_vels: &'a [f64],
    pub target_joints: &'a [f64; 6],
    /// Base height above local ground (m).
    pub height: f64,
    pub pitch: f64,
    /// Most recent stride lengths per foot (m); held between touchdowns.
    pub step_len_left: f64,
    pub step_len_right: f64,
    /// Normalized policy action, before torque scaling.
    pub action: &'a [f64; 6],
}

/// Per-term values; `total` is their sum in declaration order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardBreakdown {
    pub goal: f64,
    pub pos: f64,
    pub vel: f64,
    pub base: f64,
    pub step: f64,
    pub act: f64,
    pub total: f64,
}

pub fn compute_reward(w: &RewardWeights, inp: &RewardInputs) -> Result<RewardBreakdown> {
    let mut finite = inp.vx.is_finite()
        && inp.height.is_finite()
        && inp.pitch.is_finite()
        && inp.step_len_left.is_finite()
        && inp.step_len_right.is_finite();
    finite &= inp.joints.iter().chain(inp.joint_vels.iter()).all(|v| v.is_finite());
    finite &= inp.target_joints.iter().chain(inp.action.iter()).all(|v| v.is_finite());
    if !finite {
        return Err(Error::InvalidInput("non-finite reward input".into()));
    }

    let e_goal = (inp.vx - w.target_speed).powi(2);
    let mut e_pos = 0.0;
    for j in 0..6 {
        e_pos += (inp.joints[j] - inp.target_joints[j]).powi(2);
    }
    let e_vel: f64 = inp.joint_vels.iter().map(|v| v * v).sum();
    let e_base = (inp.height - w.target_height).powi(2) + inp.pitch.powi(2);
    let e_step = (inp.step_len_left - inp.step_len_right).powi(2);
    let act_sq: f64 = inp.action.iter().map(|a| a * a).sum();

    let goal = w.w_goal * (-w.c_goal * e_goal).exp();
    let pos = w.w_pos * (-w.c_pos * e_pos).exp();
    let vel = w.w_vel * (-w.c_vel * e_vel).exp();
    let base = w.w_base * (-w.c_base * e_base).exp();
    let step = w.w_step * (-w.c_step * e_step).exp();
    let act = w.w_act * act_sq;
    let total = goal + pos + vel + base + step + act;
    Ok(RewardBreakdown { goal, pos, vel, base, step, act, total })
}
