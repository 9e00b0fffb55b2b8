//! The clique reduction automaton and the emptiness gadget.

use super::graph::Graph;
use crate::automata::{Automaton, AutomatonBuilder, Dist, StateId};
use crate::error::{Error, Result};
use crate::numerics::{int, ratio, Rational};

pub const TAU: &str = "tau";
pub const ACCEPT: &str = "acc";

fn chain_state(g: &Graph, i: usize, j: usize) -> String {
    format!("s_{}_{}", g.vertices[i], j + 1)
}

/// Builds the reactive automaton whose best accepting mass after `n+1` steps is
/// (maximum clique size) / λ with λ = Σ 2^deg(v).
pub fn gen_clique(g: &Graph) -> Result<Automaton> {
    let n = g.vertices.len();
    if n == 0 {
        return Err(Error::Rejected("the graph has no vertices".into()));
    }
    let mut b = AutomatonBuilder::new("clique");
    b.ap(&[ACCEPT])?;
    let mut acts: Vec<&str> = g.vertices.iter().map(String::as_str).collect();
    acts.push(TAU);
    b.actions(&acts)?;
    let tau = n;
    let s = b.add_state::<&str>("s", &[])?;
    let mut chain = vec![vec![0; n]; n];
    for (i, row) in chain.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = b.add_state::<&str>(&chain_state(g, i, j), &[])?;
        }
    }
    let t = b.add_state("t", &[ACCEPT])?;
    let r = b.add_state::<&str>("r", &[])?;
    let next = |i: usize, j: usize| if j + 1 == n { t } else { chain[i][j + 1] };

    let weights: Vec<i64> = (0..n).map(|i| 1i64 << g.degree(i)).collect();
    let lambda: i64 = weights.iter().sum();
    let mut defined = vec![vec![false; n + 1]; 2 + n * n + 2];
    let mut add = |b: &mut AutomatonBuilder, src: StateId, x: usize, d: Dist| {
        defined[src][x] = true;
        b.add_transition(src, x, d);
    };
    add(&mut b, s, tau, Dist::from_entries((0..n).map(|i| (chain[i][0], ratio(weights[i], lambda)))));
    let half = ratio(1, 2);
    for i in 0..n {
        for j in 0..n {
            let src = chain[i][j];
            if i == j {
                add(&mut b, src, i, Dist::dirac(next(i, j)));
            } else if !g.adjacent(i, j) {
                add(&mut b, src, tau, Dist::dirac(next(i, j)));
            } else {
                let d = Dist::from_entries([(next(i, j), half.clone()), (r, half.clone())]);
                add(&mut b, src, j, d.clone());
                add(&mut b, src, tau, d);
            }
        }
    }
    let total = b.num_states();
    for u in 0..total {
        for x in 0..=n {
            if !defined[u][x] {
                b.add_transition(u, x, Dist::dirac(r));
            }
        }
    }
    b.initial(Dist::dirac(s));
    b.build()
}

/// λ of the construction, so that accepting masses can be read as clique sizes.
pub fn clique_lambda(g: &Graph) -> Rational {
    int((0..g.vertices.len()).map(|i| 1i64 << g.degree(i)).sum())
}

/// Adds an isolated unlabelled state that loops on every action; returns it with its id.
pub fn gen_emptiness_gadget(a: &Automaton) -> Result<(Automaton, StateId)> {
    let mut b = AutomatonBuilder::new(a.name());
    b.ap(a.ap())?;
    b.actions(a.actions())?;
    for s in 0..a.num_states() {
        b.add_state_with_label(&a.state_names()[s], a.label(s).clone())?;
    }
    let mut name = "sink".to_string();
    while a.state_id(&name).is_some() {
        name.push('\'');
    }
    let sink = b.add_state::<&str>(&name, &[])?;
    for t in a.transitions() {
        b.add_transition(t.source, t.action, t.target.clone());
    }
    for x in 0..a.num_actions() {
        b.add_transition(sink, x, Dist::dirac(sink));
    }
    b.initial(a.initial().clone());
    Ok((b.build()?, sink))
}

/// One-state reactive automaton with no accepting state over the given actions.
pub fn sink_automaton(actions: &[String]) -> Result<Automaton> {
    let mut b = AutomatonBuilder::new("sink");
    b.ap(&[ACCEPT])?;
    b.actions(actions)?;
    let s = b.add_state::<&str>("sink", &[])?;
    for x in 0..actions.len() {
        b.add_transition(s, x, Dist::dirac(s));
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::classify;
    use crate::generators::graph::parse_graph;

    #[test]
    fn figure_branch_masses() {
        let g = parse_graph("vertices a b c d\nedge a b\nedge a c\nedge a d\nedge b c\n").unwrap();
        let a = gen_clique(&g).unwrap();
        assert!(classify(&a).reactive);
        let tau = a.action_id(TAU).unwrap();
        let d = a.choice(0, tau, 0);
        let mut masses: Vec<Rational> = d.iter().map(|(_, p)| p.clone()).collect();
        masses.sort();
        assert_eq!(masses, vec![ratio(2, 18), ratio(4, 18), ratio(4, 18), ratio(8, 18)]);
    }

    #[test]
    fn single_vertex() {
        let g = parse_graph("vertices v\n").unwrap();
        let a = gen_clique(&g).unwrap();
        assert_eq!(clique_lambda(&g), int(1));
        assert!(classify(&a).reactive);
    }

    #[test]
    fn gadget_sink_enables_everything() {
        let g = parse_graph("vertices a b\nedge a b\n").unwrap();
        let (a, sink) = gen_emptiness_gadget(&gen_clique(&g).unwrap()).unwrap();
        assert!((0..a.num_actions()).all(|x| a.enables(sink, x)));
        assert!(a.label(sink).is_empty());
    }
}
