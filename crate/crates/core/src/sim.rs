//! Fixed-step forward simulation.
//!
//! One control step integrates the equations of motion with four
//! semi-implicit Euler substeps (480 Hz physics under the 120 Hz control
//! clock): contact forces and bias are evaluated at the current state, the
//! mass matrix is factorised, velocities update first, then positions.
//! Everything is pure f64 arithmetic with a fixed evaluation order, so
//! identical inputs give bit-identical trajectories.

use crate::contact::{point_force, ContactParams, ContactReport, PointContact};
use crate::dynamics::{DynContext, FkResult};
use crate::error::{Error, Result};
use crate::guide::{com_guide_force, joint_guide_torques, ComTargets, GuideGains, GuideLevel};
use crate::math::SquareMat;
use crate::model::{BipedModel, ContactPoint, GeneralizedState, PlanarModel};
use crate::terrain::Heightfield;
use std::io::Write;

/// Control-rate step period (s).
pub const CONTROL_DT: f64 = 1.0 / 120.0;
/// Physics substeps per control step.
pub const SUBSTEPS: usize = 4;
/// Any coordinate or velocity beyond this magnitude is a diverged episode.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Assistance controller evaluated inside the substep loop. A PD sampled at
/// the 120 Hz control clock is unstable on the light distal joints, so the
/// stepper re-evaluates the guide formulas at 480 Hz against fresh state;
/// the target frame stays fixed for the control step.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousGuide {
    pub gains: GuideGains,
    pub level: GuideLevel,
    pub com_targets: ComTargets,
    pub target_joints: [f64; 6],
}

/// Forces applied over one control step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInput {
    /// Actuator torques per joint (N·m); clamped to the model limits.
    pub joint_torques: Vec<f64>,
    /// External wrench on the floating base `[Fx, Fz, τ_pitch]`, held for the
    /// whole control step (perturbations and other constant forces).
    pub base_wrench: [f64; 3],
    /// Constant assistance torques per joint (N·m), not subject to actuator
    /// limits.
    pub joint_guide: Vec<f64>,
    /// Substep-rate assistance, if any.
    pub continuous_guide: Option<ContinuousGuide>,
}

impl StepInput {
    pub fn zeros(n_joints: usize) -> Self {
        StepInput {
            joint_torques: vec![0.0; n_joints],
            base_wrench: [0.0; 3],
            joint_guide: vec![0.0; n_joints],
            continuous_guide: None,
        }
    }

    fn is_finite(&self) -> bool {
        self.joint_torques.iter().chain(self.joint_guide.iter()).all(|v| v.is_finite())
            && self.base_wrench.iter().all(|v| v.is_finite())
    }
}

/// Stepper bound to one model; owns all scratch buffers.
pub struct Simulator {
    pub model: PlanarModel,
    pub contact_points: Vec<ContactPoint>,
    pub contact_params: ContactParams,
    pub substeps: usize,
    /// Soft joint stops: a spring-damper band just inside each limit. The
    /// band absorbs approach energy through the dynamics so the hard clamp
    /// (which cannot conserve momentum) almost never engages.
    pub stop_stiffness: f64,
    pub stop_damping: f64,
    pub stop_band: f64,
    ctx: DynContext,
    fk: FkResult,
    mass: SquareMat,
    rhs: Vec<f64>,
    bias: Vec<f64>,
    chol: Vec<f64>,
}

impl Simulator {
    pub fn new(model: PlanarModel, contact_points: Vec<ContactPoint>, contact_params: ContactParams) -> Result<Self> {
        model.validate()?;
        contact_params.validate()?;
        let dof = model.dof();
        let ctx = DynContext::new(&model);
        Ok(Simulator {
            model,
            contact_points,
            contact_params,
            substeps: SUBSTEPS,
            stop_stiffness: 3000.0,
            stop_damping: 5.0,
            stop_band: 0.12,
            ctx,
            fk: FkResult::default(),
            mass: SquareMat::zeros(dof),
            rhs: vec![0.0; dof],
            bias: vec![0.0; dof],
            chol: Vec::new(),
        })
    }

    pub fn for_biped(biped: &BipedModel, contact_params: ContactParams) -> Result<Self> {
        biped.validate()?;
        Self::new(biped.tree.clone(), biped.contacts.clone(), contact_params)
    }

    /// Kinematics of the current state (recomputed, not cached).
    pub fn fk(&mut self, state: &GeneralizedState) -> &FkResult {
        self.ctx.fk_into(&self.model, &state.q, &state.qdot, &mut self.fk);
        &self.fk
    }

    /// Advance `state` by one control step of `dt` seconds under `input`.
    /// Returns the contact report evaluated at the resulting state.
    pub fn step(
        &mut self,
        state: &mut GeneralizedState,
        input: &StepInput,
        hf: &Heightfield,
        dt: f64,
    ) -> Result<ContactReport> {
        if !input.is_finite() {
            return Err(Error::InvalidInput("non-finite step input".into()));
        }
        if input.joint_torques.len() != self.model.n_joints()
            || input.joint_guide.len() != self.model.n_joints()
        {
            return Err(Error::InvalidInput("step input has wrong joint count".into()));
        }
        let bd = self.model.base_dof();
        let h_sub = dt / self.substeps as f64;
        for _ in 0..self.substeps {
            self.ctx.fk_into(&self.model, &state.q, &state.qdot, &mut self.fk);
            self.ctx.bias_into(&self.model, &self.fk, &mut self.bias);
            self.ctx.mass_matrix_into(&self.model, &self.fk, &mut self.mass);

            self.rhs.fill(0.0);
            for (j, link) in self.model.links.iter().enumerate() {
                let tau = input.joint_torques[j].clamp(-link.torque_limit, link.torque_limit);
                let mut total = tau + input.joint_guide[j];
                // soft stop band
                let q = state.q[bd + j];
                let qd = state.qdot[bd + j];
                let hi = link.joint_max - self.stop_band;
                let lo = link.joint_min + self.stop_band;
                if q > hi {
                    total -= self.stop_stiffness * (q - hi);
                    if qd > 0.0 {
                        total -= self.stop_damping * qd;
                    }
                } else if q < lo {
                    total -= self.stop_stiffness * (q - lo);
                    if qd < 0.0 {
                        total -= self.stop_damping * qd;
                    }
                }
                self.rhs[bd + j] = total;
            }
            if bd == 3 {
                for k in 0..3 {
                    self.rhs[k] += input.base_wrench[k];
                }
            }
            if let Some(g) = &input.continuous_guide {
                if bd == 3 {
                    let pose = [state.q[0], state.q[1], state.q[2]];
                    let vel = [state.qdot[0], state.qdot[1], state.qdot[2]];
                    let w = com_guide_force(&g.gains, &g.level, &g.com_targets, pose, vel);
                    for k in 0..3 {
                        self.rhs[k] += w[k];
                    }
                }
                if self.model.n_joints() == 6 {
                    let tau = joint_guide_torques(
                        &g.gains,
                        &g.level,
                        &g.target_joints,
                        &state.q[bd..],
                        &state.qdot[bd..],
                    );
                    for (j, t) in tau.iter().enumerate() {
                        self.rhs[bd + j] += t;
                    }
                }
            }
            for cp in &self.contact_points {
                let pos = self.fk.point_pos(cp.body, cp.offset);
                let vel = self.fk.point_vel(cp.body, cp.offset);
                let c = point_force(hf, pos, vel, &self.contact_params);
                if c.in_contact {
                    let f = crate::math::Vec2::new(c.tangential, c.normal);
                    self.ctx.apply_point_force(&self.model, &self.fk, cp.body, pos, f, &mut self.rhs);
                }
            }
            for k in 0..self.rhs.len() {
                self.rhs[k] -= self.bias[k];
            }
            self.mass.cholesky_solve(&mut self.rhs, &mut self.chol)?;
            for k in 0..state.q.len() {
                state.qdot[k] += self.rhs[k] * h_sub;
                state.q[k] += state.qdot[k] * h_sub;
            }
            // mechanical joint stops: clamp and kill outward velocity
            for (j, link) in self.model.links.iter().enumerate() {
                let qi = bd + j;
                if state.q[qi] < link.joint_min {
                    state.q[qi] = link.joint_min;
                    if state.qdot[qi] < 0.0 {
                        state.qdot[qi] = 0.0;
                    }
                } else if state.q[qi] > link.joint_max {
                    state.q[qi] = link.joint_max;
                    if state.qdot[qi] > 0.0 {
                        state.qdot[qi] = 0.0;
                    }
                }
            }
            state.t += h_sub;
        }
        for v in state.q.iter().chain(state.qdot.iter()) {
            if !v.is_finite() || v.abs() > DIVERGENCE_LIMIT {
                return Err(Error::SimFault(format!("state diverged ({v:.3e})")));
            }
        }
        Ok(self.measure_contacts(state, hf))
    }

    /// Contact state at `state` without applying any forces.
    pub fn measure_contacts(&mut self, state: &GeneralizedState, hf: &Heightfield) -> ContactReport {
        self.ctx.fk_into(&self.model, &state.q, &state.qdot, &mut self.fk);
        let points: Vec<PointContact> = self
            .contact_points
            .iter()
            .map(|cp| {
                let pos = self.fk.point_pos(cp.body, cp.offset);
                let vel = self.fk.point_vel(cp.body, cp.offset);
                point_force(hf, pos, vel, &self.contact_params)
            })
            .collect();
        ContactReport { points }
    }
}

/// Streams per-step rows `(t, q.., qdot.., contact flags..)` to a CSV file
/// for offline inspection.
pub struct TrajectoryDumper<W: Write> {
    out: W,
    wrote_header: bool,
}

impl<W: Write> TrajectoryDumper<W> {
    pub fn new(out: W) -> Self {
        TrajectoryDumper { out, wrote_header: false }
    }

    pub fn record(&mut self, state: &GeneralizedState, report: &ContactReport) -> Result<()> {
        if !self.wrote_header {
            let mut cols = vec!["t".to_string()];
            cols.extend((0..state.q.len()).map(|i| format!("q{i}")));
            cols.extend((0..state.qdot.len()).map(|i| format!("qd{i}")));
            cols.extend((0..report.points.len()).map(|i| format!("c{i}")));
            writeln!(self.out, "{}", cols.join(","))?;
            self.wrote_header = true;
        }
        let mut row = vec![format!("{:.6}", state.t)];
        row.extend(state.q.iter().map(|v| format!("{v:.9}")));
        row.extend(state.qdot.iter().map(|v| format!("{v:.9}")));
        row.extend(report.points.iter().map(|p| if p.in_contact { "1".into() } else { "0".into() }));
        writeln!(self.out, "{}", row.join(","))?;
        Ok(())
    }
}
