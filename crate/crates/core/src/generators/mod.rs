//! Instance generators: the clique reduction, the emptiness gadget, seeded random automata,
//! and the fixture corpus.

mod clique;
pub mod corpus;
mod graph;
mod random;

pub use clique::{clique_lambda, gen_clique, gen_emptiness_gadget, sink_automaton, ACCEPT, TAU};
pub use corpus::{corpus, exam1, fixture, Fixture};
pub use graph::{parse_graph, Graph};
pub use random::{gen_random, random_distribution, RandomParams};
