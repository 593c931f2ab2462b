//! Articulated planar model description.
//!
//! A model is a tree of rigid links connected by revolute joints, rooted at a
//! base that is either floating (x, z, pitch) or welded to the world. The
//! shipped biped is a 7-link sagittal machine: a floating torso plus
//! thigh/shank/foot per leg, 6 actuated joints, 9 generalized coordinates
//! `q = [x, z, pitch, hip_r, knee_r, ankle_r, hip_l, knee_l, ankle_l]`.
//!
//! Conventions: x forward, z up, angles counterclockwise. At the zero
//! configuration both legs hang straight down with the soles level. Positive
//! hip swings the leg forward; the knee bends backward, so its working range
//! is negative.

use crate::error::{Error, Result};
use crate::math::Vec2;

/// Root of the kinematic tree.
#[derive(Debug, Clone)]
pub enum BaseKind {
    /// Free planar body with coordinates (x, z, pitch).
    Floating { mass: f64, inertia: f64, com_offset: Vec2 },
    /// Welded to the world at the origin; contributes no coordinates.
    Fixed,
}

/// One link, attached to its parent by a revolute joint.
#[derive(Debug, Clone)]
pub struct Link {
    pub name: String,
    /// Parent link index; `None` attaches to the base.
    pub parent: Option<usize>,
    /// Joint anchor expressed in the parent frame (m).
    pub joint_offset: Vec2,
    /// Mass (kg).
    pub mass: f64,
    /// Rotational inertia about the link CoM (kg·m²).
    pub inertia: f64,
    /// Reference length along the link's zero-configuration axis (m).
    pub length: f64,
    /// CoM position in the link frame (m).
    pub com_offset: Vec2,
    /// Mechanical joint range (rad).
    pub joint_min: f64,
    pub joint_max: f64,
    /// Actuator saturation (N·m).
    pub torque_limit: f64,
}

/// General planar kinematic tree; the dynamics backbone operates on this.
#[derive(Debug, Clone)]
pub struct PlanarModel {
    pub base: BaseKind,
    pub links: Vec<Link>,
    /// Gravitational acceleration, positive downward (m/s²).
    pub gravity: f64,
}

impl PlanarModel {
    /// Generalized-coordinate count: base DOF plus one per joint.
    pub fn dof(&self) -> usize {
        self.base_dof() + self.links.len()
    }

    pub fn base_dof(&self) -> usize {
        match self.base {
            BaseKind::Floating { .. } => 3,
            BaseKind::Fixed => 0,
        }
    }

    pub fn n_joints(&self) -> usize {
        self.links.len()
    }

    /// Index of joint `j`'s angle within the generalized coordinates.
    pub fn joint_coord(&self, j: usize) -> usize {
        self.base_dof() + j
    }

    pub fn validate(&self) -> Result<()> {
        if let BaseKind::Floating { mass, inertia, .. } = self.base {
            if mass <= 0.0 || inertia <= 0.0 {
                return Err(Error::InvalidInput("base mass and inertia must be positive".into()));
            }
        }
        for (i, l) in self.links.iter().enumerate() {
            if l.mass <= 0.0 || l.inertia <= 0.0 || l.length <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "link {} ({}) needs positive mass, inertia and length",
                    i, l.name
                )));
            }
            if let Some(p) = l.parent {
                if p >= i {
                    return Err(Error::InvalidInput(format!(
                        "link {} must appear after its parent {}",
                        i, p
                    )));
                }
            }
            if l.joint_min > l.joint_max {
                return Err(Error::InvalidInput(format!("link {} has inverted joint range", i)));
            }
        }
        Ok(())
    }
}

/// Generalized position/velocity of a model plus the simulation clock.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedState {
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    /// Simulation time (s).
    pub t: f64,
}

impl GeneralizedState {
    pub fn zeros(dof: usize) -> Self {
        GeneralizedState { q: vec![0.0; dof], qdot: vec![0.0; dof], t: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.qdot.iter()).all(|v| v.is_finite())
    }
}

/// A ground-collision probe point fixed to a link (or the base).
#[derive(Debug, Clone)]
pub struct ContactPoint {
    pub name: String,
    /// Body index: 0 is the base, `i + 1` is link `i`.
    pub body: usize,
    /// Offset in the body frame (m).
    pub offset: Vec2,
}

/// Joint indices of the biped, in generalized-coordinate order.
pub const JOINT_NAMES: [&str; 6] = ["hip_r", "knee_r", "ankle_r", "hip_l", "knee_l", "ankle_l"];

/// Contact point order used everywhere a 4-wide contact vector appears.
pub const CONTACT_NAMES: [&str; 4] = ["heel_r", "toe_r", "heel_l", "toe_l"];

/// Morphology knobs for the shipped biped. All dimensions in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct Morphology {
    pub torso_mass: f64,
    pub torso_inertia: f64,
    pub torso_length: f64,
    pub thigh_mass: f64,
    pub thigh_length: f64,
    pub shank_mass: f64,
    pub shank_length: f64,
    pub foot_mass: f64,
    pub foot_length: f64,
    /// Foot rotational inertia about its CoM (kg·m²); feet are squat boxes
    /// with soles, not thin rods.
    pub foot_inertia: f64,
    /// Sole drop below the ankle joint (m).
    pub sole_drop: f64,
    /// Heel setback behind the ankle (m).
    pub heel_back: f64,
    pub torque_limit: f64,
    pub gravity: f64,
}

impl Default for Morphology {
    fn default() -> Self {
        Morphology {
            torso_mass: 16.0,
            torso_inertia: 0.6,
            torso_length: 0.5,
            thigh_mass: 4.5,
            thigh_length: 0.4,
            shank_mass: 2.5,
            shank_length: 0.4,
            foot_mass: 1.0,
            foot_length: 0.2,
            foot_inertia: 0.01,
            sole_drop: 0.05,
            heel_back: 0.06,
            torque_limit: 150.0,
            gravity: 9.81,
        }
    }
}

/// The biped: a planar tree plus foot contact geometry and fault probes.
#[derive(Debug, Clone)]
pub struct BipedModel {
    pub tree: PlanarModel,
    /// Exactly four contact points: heel/toe of the right then left foot.
    pub contacts: Vec<ContactPoint>,
    /// Body indices of the two feet, right then left.
    pub foot_bodies: [usize; 2],
    /// Points that must stay above ground (torso top, hip, knees); touching
    /// ground with any of these ends the episode.
    pub fault_probes: Vec<ContactPoint>,
    /// Base height above flat ground with both soles resting (m).
    pub standing_height: f64,
    pub leg_length: f64,
}

impl BipedModel {
    pub fn new(m: &Morphology) -> Result<Self> {
        let rod = |mass: f64, len: f64| mass * len * len / 12.0;
        let leg = |side: &str, parent_of_thigh: Option<usize>, base_idx: usize| -> Vec<Link> {
            let _ = base_idx;
            vec![
                Link {
                    name: format!("thigh_{side}"),
                    parent: parent_of_thigh,
                    joint_offset: Vec2::ZERO, // hip at the base origin
                    mass: m.thigh_mass,
                    inertia: rod(m.thigh_mass, m.thigh_length),
                    length: m.thigh_length,
                    com_offset: Vec2::new(0.0, -m.thigh_length / 2.0),
                    joint_min: -1.0,
                    joint_max: 1.2,
                    torque_limit: m.torque_limit,
                },
                Link {
                    name: format!("shank_{side}"),
                    parent: None, // fixed up below
                    joint_offset: Vec2::new(0.0, -m.thigh_length),
                    mass: m.shank_mass,
                    inertia: rod(m.shank_mass, m.shank_length),
                    length: m.shank_length,
                    com_offset: Vec2::new(0.0, -m.shank_length / 2.0),
                    joint_min: -2.2,
                    joint_max: 0.02,
                    torque_limit: m.torque_limit,
                },
                Link {
                    name: format!("foot_{side}"),
                    parent: None, // fixed up below
                    joint_offset: Vec2::new(0.0, -m.shank_length),
                    mass: m.foot_mass,
                    inertia: m.foot_inertia,
                    length: m.foot_length,
                    com_offset: Vec2::new(m.foot_length / 2.0 - m.heel_back, -m.sole_drop / 2.0),
                    joint_min: -0.8,
                    joint_max: 0.8,
                    torque_limit: m.torque_limit,
                },
            ]
        };

        let mut links = Vec::new();
        links.extend(leg("r", None, 0));
        links.extend(leg("l", None, 0));
        // thigh_r=0, shank_r=1, foot_r=2, thigh_l=3, shank_l=4, foot_l=5
        links[1].parent = Some(0);
        links[2].parent = Some(1);
        links[4].parent = Some(3);
        links[5].parent = Some(4);

        let tree = PlanarModel {
            base: BaseKind::Floating {
                mass: m.torso_mass,
                inertia: m.torso_inertia,
                com_offset: Vec2::new(0.0, m.torso_length / 2.0),
            },
            links,
            gravity: m.gravity,
        };
        tree.validate()?;

        let toe_fwd = m.foot_length - m.heel_back;
        let contact = |name: &str, foot_link: usize, x: f64| ContactPoint {
            name: name.into(),
            body: foot_link + 1,
            offset: Vec2::new(x, -m.sole_drop),
        };
        let contacts = vec![
            contact("heel_r", 2, -m.heel_back),
            contact("toe_r", 2, toe_fwd),
            contact("heel_l", 5, -m.heel_back),
            contact("toe_l", 5, toe_fwd),
        ];

        let probe = |name: &str, body: usize, off: Vec2| ContactPoint { name: name.into(), body, offset: off };
        let fault_probes = vec![
            probe("torso_top", 0, Vec2::new(0.0, m.torso_length)),
            probe("hip", 0, Vec2::ZERO),
            probe("knee_r", 2, Vec2::ZERO),
            probe("knee_l", 5, Vec2::ZERO),
        ];

        let leg_length = m.thigh_length + m.shank_length;
        Ok(BipedModel {
            tree,
            contacts,
            foot_bodies: [3, 6],
            fault_probes,
            standing_height: leg_length + m.sole_drop,
            leg_length,
        })
    }

    /// Validates the biped-specific shape invariants.
    pub fn validate(&self) -> Result<()> {
        self.tree.validate()?;
        if self.tree.n_joints() != 6 {
            return Err(Error::InvalidInput("biped needs exactly 6 actuated joints".into()));
        }
        if !matches!(self.tree.base, BaseKind::Floating { .. }) {
            return Err(Error::InvalidInput("biped base must be floating".into()));
        }
        if self.contacts.len() != 4 {
            return Err(Error::InvalidInput("biped needs exactly 4 contact points".into()));
        }
        Ok(())
    }

    pub fn torque_limits(&self) -> [f64; 6] {
        let mut out = [0.0; 6];
        for (i, l) in self.tree.links.iter().enumerate() {
            out[i] = l.torque_limit;
        }
        out
    }

    pub fn total_mass(&self) -> f64 {
        let base = match self.tree.base {
            BaseKind::Floating { mass, .. } => mass,
            BaseKind::Fixed => 0.0,
        };
        base + self.tree.links.iter().map(|l| l.mass).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_biped_is_valid() {
        let b = BipedModel::new(&Morphology::default()).unwrap();
        b.validate().unwrap();
        assert_eq!(b.tree.dof(), 9);
        assert!((b.total_mass() - 32.0).abs() < 1e-12);
        assert!((b.standing_height - 0.85).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_mass() {
        let mut m = Morphology::default();
        m.thigh_mass = 0.0;
        assert!(BipedModel::new(&m).is_err());
    }

    #[test]
    fn rejects_child_before_parent() {
        let mut b = BipedModel::new(&Morphology::default()).unwrap();
        b.tree.links[0].parent = Some(3);
        assert!(b.tree.validate().is_err());
    }
}
