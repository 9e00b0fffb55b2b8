//! The automaton model, its text format, and structural operations.

mod dist;
mod format;
mod model;
mod ops;

pub use dist::{Dist, StateId};
pub use format::{parse_dist_literal, parse_model, serialize_model};
pub use model::{ActionId, Automaton, AutomatonBuilder, Label, PropId, Transition};
pub use ops::{
    action_label_mass, classify, compose, direct_sum, ensure_extended, extend, extend_input_enabled, label_mass,
    parallel_compose, ClassificationReport, Composition, DirectSum, Extended, DEAD,
};
