//! Recognition of pairwise pedestrian interactions and collective group
//! behaviors from ground-plane trajectories.
//!
//! The pipeline has two classification stages. For every ordered pair of
//! pedestrians a compact interaction descriptor ([`pid`]) is classified by a
//! random forest ([`forest`]); the predicted interactions of a group are then
//! pooled with group speed, dispersion and shape cues into a collective
//! descriptor ([`cbd`]) that a second forest classifies.

pub mod cbd;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod forest;
pub mod label;
pub mod pid;
pub mod pipeline;
pub mod synth;
pub mod trajectory;

mod fsutil;
mod seed;

pub use error::{Error, Result};
pub use fsutil::write_atomic;
pub use label::Label;
