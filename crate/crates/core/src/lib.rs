//! Planar biped locomotion lab.
//!
//! A self-contained training and evaluation stack for a sagittal-plane biped:
//! articulated rigid-body dynamics with penalty contacts, procedural terrain
//! courses, a hand-built cyclic walking gait used as a tracking target,
//! PD assistance forces with a staged decay curriculum, a from-scratch PPO
//! trainer, and a trial harness that reports distance traversed.
//!
//! The crate is organised bottom-up: `model`/`dynamics`/`contact`/`sim` form
//! the physics core, `terrain` and `gait` provide the world and the reference
//! motion, `guide`/`curriculum`/`reward` implement the staged training
//! schedule, `nn`/`ppo`/`train` the learner, and `eval` the trial protocol.
//! Everything is deterministic for a fixed seed in single-thread mode.

// pub mod checkpoint;
// pub mod config;
pub mod contact;
pub mod curriculum;
pub mod dynamics;
pub mod env;
pub mod error;
// pub mod eval;
pub mod gait;
pub mod guide;
pub mod math;
pub mod model;
// pub mod nn;
// pub mod ppo;
pub mod reward;
pub mod rng;
pub mod robot_state;
pub mod sim;
// pub mod stats;
pub mod terrain;
// pub mod train;

pub use error::{Error, Result};
