//! Planar articulated-body dynamics.
//!
//! Joint-space equations of motion `M(q) q̈ + h(q, q̇) = τ` for a
//! [`PlanarModel`]. The mass matrix is assembled by projecting every body's
//! inertia through its CoM Jacobian, and the bias vector comes from a
//! recursive Newton–Euler sweep evaluated at zero joint acceleration (the
//! velocity-product accelerations), plus gravity. Bodies are indexed 0 for
//! the base and `i + 1` for link `i`; in planar motion the angular Jacobian
//! entries are 0/1, which keeps both passes short.

use crate::error::{Error, Result};
use crate::math::{Rot2, SquareMat, Vec2};
use crate::model::{BaseKind, GeneralizedState, PlanarModel};

/// World-frame pose and velocity of every body, plus per-body velocity-product
/// accelerations when requested.
#[derive(Debug, Clone, Default)]
pub struct FkResult {
    /// Body frame origin (the joint anchor for links).
    pub pos: Vec<Vec2>,
    /// Body world angle (rad).
    pub rot: Vec<f64>,
    /// Frame-origin velocity.
    pub vel: Vec<Vec2>,
    /// Angular velocity (rad/s).
    pub omega: Vec<f64>,
    /// Body CoM position.
    pub com: Vec<Vec2>,
    /// Body CoM velocity.
    pub com_vel: Vec<Vec2>,
}

impl FkResult {
    fn resize(&mut self, n_bodies: usize) {
        self.pos.resize(n_bodies, Vec2::ZERO);
        self.rot.resize(n_bodies, 0.0);
        self.vel.resize(n_bodies, Vec2::ZERO);
        self.omega.resize(n_bodies, 0.0);
        self.com.resize(n_bodies, Vec2::ZERO);
        self.com_vel.resize(n_bodies, Vec2::ZERO);
    }

    /// World position of a point given in `body`'s frame.
    pub fn point_pos(&self, body: usize, offset: Vec2) -> Vec2 {
        self.pos[body] + Rot2::new(self.rot[body]).apply(offset)
    }

    /// World velocity of a point given in `body`'s frame.
    pub fn point_vel(&self, body: usize, offset: Vec2) -> Vec2 {
        let r = Rot2::new(self.rot[body]).apply(offset);
        self.vel[body] + r.perp() * self.omega[body]
    }
}

/// Reusable dynamics workspace bound to one model topology.
#[derive(Debug, Clone)]
pub struct DynContext {
    /// Ancestor joint indices per body (base first entry: empty).
    ancestors: Vec<Vec<usize>>,
    /// Velocity-product acceleration of each body frame origin.
    acc0: Vec<Vec2>,
    /// Per-body linear Jacobian columns as (coordinate index, direction).
    jac_cols: Vec<(usize, Vec2)>,
}

impl DynContext {
    pub fn new(model: &PlanarModel) -> Self {
        let n_bodies = model.links.len() + 1;
        let mut ancestors: Vec<Vec<usize>> = vec![Vec::new()];
        for (i, link) in model.links.iter().enumerate() {
            let mut chain = match link.parent {
                Some(p) => ancestors[p + 1].clone(),
                None => Vec::new(),
            };
            chain.push(i);
            ancestors.push(chain);
        }
        DynContext { ancestors, acc0: vec![Vec2::ZERO; n_bodies], jac_cols: Vec::with_capacity(16) }
    }

    /// Forward kinematics into `fk`. `q`/`qdot` follow the model's layout.
    pub fn fk_into(&self, model: &PlanarModel, q: &[f64], qdot: &[f64], fk: &mut FkResult) {
        let nb = model.links.len() + 1;
        fk.resize(nb);
        let bd = model.base_dof();
        match model.base {
            BaseKind::Floating { com_offset, .. } => {
                fk.pos[0] = Vec2::new(q[0], q[1]);
                fk.rot[0] = q[2];
                fk.vel[0] = Vec2::new(qdot[0], qdot[1]);
                fk.omega[0] = qdot[2];
                let r = Rot2::new(fk.rot[0]).apply(com_offset);
                fk.com[0] = fk.pos[0] + r;
                fk.com_vel[0] = fk.vel[0] + r.perp() * fk.omega[0];
            }
            BaseKind::Fixed => {
                fk.pos[0] = Vec2::ZERO;
                fk.rot[0] = 0.0;
                fk.vel[0] = Vec2::ZERO;
                fk.omega[0] = 0.0;
                fk.com[0] = Vec2::ZERO;
                fk.com_vel[0] = Vec2::ZERO;
            }
        }
        for (i, link) in model.links.iter().enumerate() {
            let b = i + 1;
            let p = link.parent.map_or(0, |j| j + 1);
            let anchor_off = Rot2::new(fk.rot[p]).apply(link.joint_offset);
            let pos = fk.pos[p] + anchor_off;
            let vel = fk.vel[p] + anchor_off.perp() * fk.omega[p];
            let rot = fk.rot[p] + q[bd + i];
            let omega = fk.omega[p] + qdot[bd + i];
            let com_off = Rot2::new(rot).apply(link.com_offset);
            fk.pos[b] = pos;
            fk.rot[b] = rot;
            fk.vel[b] = vel;
            fk.omega[b] = omega;
            fk.com[b] = pos + com_off;
            fk.com_vel[b] = vel + com_off.perp() * omega;
        }
    }

    /// Linear CoM Jacobian columns of body `b` appended to `self.jac_cols`.
    fn com_jacobian(&mut self, model: &PlanarModel, fk: &FkResult, b: usize) {
        self.jac_cols.clear();
        let bd = model.base_dof();
        if bd == 3 {
            self.jac_cols.push((0, Vec2::new(1.0, 0.0)));
            self.jac_cols.push((1, Vec2::new(0.0, 1.0)));
            self.jac_cols.push((2, (fk.com[b] - fk.pos[0]).perp()));
        }
        for &j in &self.ancestors[b] {
            self.jac_cols.push((bd + j, (fk.com[b] - fk.pos[j + 1]).perp()));
        }
    }

    /// Joint-space inertia matrix; symmetric positive definite.
    pub fn mass_matrix_into(&mut self, model: &PlanarModel, fk: &FkResult, m_out: &mut SquareMat) {
        debug_assert_eq!(m_out.dim(), model.dof());
        m_out.fill_zero();
        let bd = model.base_dof();
        for b in 0..fk.pos.len() {
            let (mass, inertia) = body_inertia(model, b);
            self.com_jacobian(model, fk, b);
            for a in 0..self.jac_cols.len() {
                let (ka, va) = self.jac_cols[a];
                for bb in a..self.jac_cols.len() {
                    let (kb, vb) = self.jac_cols[bb];
                    m_out.add_to(ka, kb, mass * va.dot(vb));
                }
            }
            // angular rows: 1 for pitch and every ancestor joint
            let mut ang: [usize; 16] = [0; 16];
            let mut na = 0;
            if bd == 3 {
                ang[na] = 2;
                na += 1;
            }
            for &j in &self.ancestors[b] {
                ang[na] = bd + j;
                na += 1;
            }
            for a in 0..na {
                for bb in a..na {
                    m_out.add_to(ang[a], ang[bb], inertia);
                }
            }
        }
        // mirror the upper triangle
        for r in 0..m_out.dim() {
            for c in (r + 1)..m_out.dim() {
                let v = m_out.get(r, c);
                m_out.set(c, r, v);
            }
        }
    }

    /// Bias forces `h(q, q̇)` (Coriolis/centrifugal plus gravity) such that
    /// `M q̈ = τ − h`.
    pub fn bias_into(&mut self, model: &PlanarModel, fk: &FkResult, out: &mut [f64]) {
        debug_assert_eq!(out.len(), model.dof());
        out.fill(0.0);
        // velocity-product accelerations of frame origins (q̈ = 0, so every
        // angular acceleration is zero in the plane)
        self.acc0[0] = Vec2::ZERO;
        for (i, link) in model.links.iter().enumerate() {
            let b = i + 1;
            let p = link.parent.map_or(0, |j| j + 1);
            let r = fk.pos[b] - fk.pos[p];
            self.acc0[b] = self.acc0[p] - r * (fk.omega[p] * fk.omega[p]);
        }
        let g = Vec2::new(0.0, model.gravity); // (a₀ − g_vec) with g_vec = (0, −g)
        for b in 0..fk.pos.len() {
            let (mass, _) = body_inertia(model, b);
            let r_com = fk.com[b] - fk.pos[b];
            let com_acc = self.acc0[b] - r_com * (fk.omega[b] * fk.omega[b]);
            let f = (com_acc + g) * mass;
            self.com_jacobian(model, fk, b);
            for &(k, v) in &self.jac_cols {
                out[k] += v.dot(f);
            }
        }
    }

    /// Accumulate the generalized force of a world-frame force `f` applied at
    /// world point `p` on `body`.
    pub fn apply_point_force(
        &self,
        model: &PlanarModel,
        fk: &FkResult,
        body: usize,
        p: Vec2,
        f: Vec2,
        tau: &mut [f64],
    ) {
        let bd = model.base_dof();
        if bd == 3 {
            tau[0] += f.x;
            tau[1] += f.z;
            tau[2] += (p - fk.pos[0]).perp().dot(f);
        }
        for &j in &self.ancestors[body] {
            tau[bd + j] += (p - fk.pos[j + 1]).perp().dot(f);
        }
    }
}

fn body_inertia(model: &PlanarModel, b: usize) -> (f64, f64) {
    if b == 0 {
        match model.base {
            BaseKind::Floating { mass, inertia, .. } => (mass, inertia),
            BaseKind::Fixed => (0.0, 0.0),
        }
    } else {
        let l = &model.links[b - 1];
        (l.mass, l.inertia)
    }
}

/// Joint-space inertia matrix at configuration `q`.
pub fn mass_matrix(model: &PlanarModel, q: &[f64]) -> Result<SquareMat> {
    check_finite(q, "q")?;
    let qdot = vec![0.0; model.dof()];
    let mut fk = FkResult::default();
    let mut ctx = DynContext::new(model);
    ctx.fk_into(model, q, &qdot, &mut fk);
    let mut m = SquareMat::zeros(model.dof());
    ctx.mass_matrix_into(model, &fk, &mut m);
    Ok(m)
}

/// Bias forces (Coriolis/centrifugal + gravity) at `(q, qdot)`.
pub fn bias_forces(model: &PlanarModel, q: &[f64], qdot: &[f64]) -> Result<Vec<f64>> {
    check_finite(q, "q")?;
    check_finite(qdot, "qdot")?;
    let mut fk = FkResult::default();
    let mut ctx = DynContext::new(model);
    ctx.fk_into(model, q, qdot, &mut fk);
    let mut h = vec![0.0; model.dof()];
    ctx.bias_into(model, &fk, &mut h);
    Ok(h)
}

/// World poses of all bodies and kinematics of the given body-fixed points.
pub fn forward_kinematics(model: &PlanarModel, state: &GeneralizedState) -> Result<FkResult> {
    check_finite(&state.q, "q")?;
    check_finite(&state.qdot, "qdot")?;
    let mut fk = FkResult::default();
    DynContext::new(model).fk_into(model, &state.q, &state.qdot, &mut fk);
    Ok(fk)
}

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite {what}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BipedModel, Link, Morphology};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn free_body(mass: f64, inertia: f64) -> PlanarModel {
        PlanarModel {
            base: BaseKind::Floating { mass, inertia, com_offset: Vec2::ZERO },
            links: vec![],
            gravity: 9.81,
        }
    }

    #[test]
    fn free_body_mass_matrix_is_diagonal() {
        let m = free_body(3.5, 0.42);
        let q = [1.0, 2.0, 0.7];
        let mm = mass_matrix(&m, &q).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let expect = if r != c { 0.0 } else { [3.5, 3.5, 0.42][r] };
                assert!((mm.get(r, c) - expect).abs() < 1e-14, "entry ({r},{c})");
            }
        }
    }

    #[test]
    fn mass_matrix_symmetric_for_random_configs() {
        let biped = BipedModel::new(&Morphology::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let q: Vec<f64> = (0..9).map(|_| rng.random_range(-1.5..1.5)).collect();
            let m = mass_matrix(&biped.tree, &q).unwrap();
            assert!(m.asymmetry() <= 1e-10);
            // positive definite: Cholesky solve succeeds
            let mut rhs = vec![1.0; 9];
            m.cholesky_solve(&mut rhs, &mut Vec::new()).unwrap();
        }
    }

    #[test]
    fn statics_bias_is_total_weight() {
        let biped = BipedModel::new(&Morphology::default()).unwrap();
        let q = vec![0.0; 9];
        let qdot = vec![0.0; 9];
        let h = bias_forces(&biped.tree, &q, &qdot).unwrap();
        assert!(h[0].abs() < 1e-10);
        assert!((h[1] - biped.total_mass() * 9.81).abs() < 1e-10);
        // velocity-dependent part is zero: joint rows hold only gravity moments
        for k in 3..9 {
            assert!(h[k].is_finite());
        }
    }

    #[test]
    fn coriolis_terms_are_quadratic_in_qdot() {
        let biped = BipedModel::new(&Morphology::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let q: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
            let qd: Vec<f64> = (0..9).map(|_| rng.random_range(-2.0..2.0)).collect();
            let qd2: Vec<f64> = qd.iter().map(|v| 2.0 * v).collect();
            let h0 = bias_forces(&biped.tree, &q, &vec![0.0; 9]).unwrap();
            let h1 = bias_forces(&biped.tree, &q, &qd).unwrap();
            let h2 = bias_forces(&biped.tree, &q, &qd2).unwrap();
            for k in 0..9 {
                let once = h1[k] - h0[k];
                let twice = h2[k] - h0[k];
                assert!(
                    (twice - 4.0 * once).abs() <= 1e-8 * (1.0 + twice.abs()),
                    "row {k}: {twice} vs {}",
                    4.0 * once
                );
            }
        }
    }

    #[test]
    fn rejects_non_finite_input() {
        let m = free_body(1.0, 1.0);
        assert!(mass_matrix(&m, &[f64::NAN, 0.0, 0.0]).is_err());
        assert!(bias_forces(&m, &[0.0; 3], &[f64::INFINITY, 0.0, 0.0]).is_err());
    }

    #[test]
    fn fk_translation_shifts_contact_points() {
        let biped = BipedModel::new(&Morphology::default()).unwrap();
        let mut s = GeneralizedState::zeros(9);
        s.q[1] = 0.85;
        let fk0 = forward_kinematics(&biped.tree, &s).unwrap();
        let mut s1 = s.clone();
        s1.q[0] += 0.37;
        let fk1 = forward_kinematics(&biped.tree, &s1).unwrap();
        for c in &biped.contacts {
            let p0 = fk0.point_pos(c.body, c.offset);
            let p1 = fk1.point_pos(c.body, c.offset);
            assert!((p1.x - p0.x - 0.37).abs() < 1e-12);
            assert!((p1.z - p0.z).abs() < 1e-12);
        }
    }

    #[test]
    fn fk_zero_config_contact_points_at_reference() {
        let biped = BipedModel::new(&Morphology::default()).unwrap();
        let s = GeneralizedState::zeros(9);
        let fk = forward_kinematics(&biped.tree, &s).unwrap();
        // soles sit standing_height below the base, heels 0.06 m back
        let heel = fk.point_pos(biped.contacts[0].body, biped.contacts[0].offset);
        assert!((heel.x + 0.06).abs() < 1e-12);
        assert!((heel.z + biped.standing_height).abs() < 1e-12);
        let toe = fk.point_pos(biped.contacts[1].body, biped.contacts[1].offset);
        assert!((toe.x - 0.14).abs() < 1e-12);
    }

    #[test]
    fn contact_velocity_matches_finite_difference() {
        let biped = BipedModel::new(&Morphology::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let mut s = GeneralizedState::zeros(9);
            for k in 0..9 {
                s.q[k] = rng.random_range(-0.8..0.8);
                s.qdot[k] = rng.random_range(-1.5..1.5);
            }
            let dt = 1e-6;
            let mut s2 = s.clone();
            for k in 0..9 {
                s2.q[k] += s.qdot[k] * dt;
            }
            let fk = forward_kinematics(&biped.tree, &s).unwrap();
            let fk2 = forward_kinematics(&biped.tree, &s2).unwrap();
            for c in &biped.contacts {
                let v = fk.point_vel(c.body, c.offset);
                let p0 = fk.point_pos(c.body, c.offset);
                let p1 = fk2.point_pos(c.body, c.offset);
                let fd = Vec2::new((p1.x - p0.x) / dt, (p1.z - p0.z) / dt);
                let scale = v.norm().max(1e-6);
                assert!((v - fd).norm() / scale <= 1e-4);
            }
        }
    }

    #[test]
    fn two_link_chain_matches_composite_check() {
        // one link on a fixed base behaves as a simple pendulum
        let model = PlanarModel {
            base: BaseKind::Fixed,
            links: vec![Link {
                name: "rod".into(),
                parent: None,
                joint_offset: Vec2::ZERO,
                mass: 2.0,
                inertia: 2.0 * 0.81 / 12.0,
                length: 0.9,
                com_offset: Vec2::new(0.0, -0.45),
                joint_min: -10.0,
                joint_max: 10.0,
                torque_limit: 100.0,
            }],
            gravity: 9.81,
        };
        let mm = mass_matrix(&model, &[0.3]).unwrap();
        // I_pivot = I_com + m lc²
        let expect = 2.0 * 0.81 / 12.0 + 2.0 * 0.45 * 0.45;
        assert!((mm.get(0, 0) - expect).abs() < 1e-12);
        let h = bias_forces(&model, &[0.3], &[0.0]).unwrap();
        assert!((h[0] - 2.0 * 9.81 * 0.45 * 0.3f64.sin()).abs() < 1e-12);
    }
}
