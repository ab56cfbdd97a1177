//! Detectability analysis for discrete-event systems.
//!
//! The crate decides instant strong, strong, eventual strong, weak and weak
//! approximate detectability of finite labeled state-transition systems, and
//! lifts the analyses to labeled Petri nets: exactly on bounded nets through
//! the reachability graph, refutation-soundly on unbounded nets through
//! budgeted witness searches, with Yen-path-formula instances emitted for
//! external solving.

pub mod constructions;
pub mod detect;
pub mod format;
mod graph;
pub mod lsts;
pub mod observer;
pub mod petri;
pub mod random;
pub mod verdict;

pub use format::{parse_lsts, serialize_lsts, ParseError};
pub use lsts::{
    accessible_part, directly_observed, eps_closure, estimate, is_deterministic, Label, LabelWord,
    Lsts, LstsBuilder, ModelError, StateEstimate,
};
pub use random::{random_lsts, RandomLimits};
pub use verdict::{Outcome, Property, Step, Verdict, Witness};
