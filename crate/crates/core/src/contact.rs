//! Penalty ground contacts: spring-damper normal force with a friction-cone
//! clamp on the tangential force. Points over gap intervals fall through.

use crate::error::{Error, Result};
use crate::math::Vec2;
use crate::terrain::Heightfield;

#[derive(Debug, Clone, PartialEq)]
pub struct ContactParams {
    /// Normal spring stiffness (N/m).
    pub k_p: f64,
    /// Normal damping (N·s/m).
    pub k_d: f64,
    /// Tangential damping before the friction clamp (N·s/m).
    pub k_t: f64,
    /// Coulomb friction coefficient.
    pub mu: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        // damping must satisfy k_d·h/m_eff < 2 at the 480 Hz substep for the
        // lightest body touching ground (a foot, effective mass ≈ 0.5 kg),
        // or the explicit damping term oscillates and injects energy
        ContactParams { k_p: 1e5, k_d: 300.0, k_t: 300.0, mu: 0.9 }
    }
}

impl ContactParams {
    pub fn validate(&self) -> Result<()> {
        if self.k_p <= 0.0 || self.k_d <= 0.0 || self.k_t <= 0.0 || self.mu <= 0.0 {
            return Err(Error::InvalidInput("contact parameters must be positive".into()));
        }
        Ok(())
    }
}

/// Force at one contact point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PointContact {
    pub in_contact: bool,
    /// Normal (vertical) force, ≥ 0 (N).
    pub normal: f64,
    /// Tangential (horizontal) force, |f| ≤ μ·normal (N).
    pub tangential: f64,
    /// World position of the point (m).
    pub pos: Vec2,
}

/// Per-step contact state of all model contact points, in model order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContactReport {
    pub points: Vec<PointContact>,
}

impl ContactReport {
    pub fn flags(&self) -> Vec<bool> {
        self.points.iter().map(|p| p.in_contact).collect()
    }

    pub fn total_normal(&self) -> f64 {
        self.points.iter().map(|p| p.normal).sum()
    }
}

/// Penalty force at a single point with world position `pos`, velocity `vel`.
pub fn point_force(hf: &Heightfield, pos: Vec2, vel: Vec2, params: &ContactParams) -> PointContact {
    let (ground, is_gap) = hf.height_at(pos.x);
    let penetration = ground - pos.z;
    if is_gap || penetration <= 0.0 {
        return PointContact { in_contact: false, normal: 0.0, tangential: 0.0, pos };
    }
    let normal = (params.k_p * penetration - params.k_d * vel.z).max(0.0);
    let limit = params.mu * normal;
    let tangential = (-params.k_t * vel.x).clamp(-limit, limit);
    PointContact { in_contact: true, normal, tangential, pos }
}
