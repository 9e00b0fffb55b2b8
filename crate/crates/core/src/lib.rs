//! Exact-arithmetic bisimulations, metrics and trace equivalences for probabilistic automata.

pub mod automata;
pub mod bisimulation;
pub mod cli;
pub mod error;
pub mod generators;
pub mod lifting;
pub mod logic;
pub mod metrics;
pub mod numerics;
pub mod reactive;
pub mod traces;

pub use error::{Error, Result};
