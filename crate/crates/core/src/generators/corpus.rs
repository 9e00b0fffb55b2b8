//! Named fixtures reproducing the worked examples, with their expected verdicts.

use crate::automata::{compose, parse_model, Automaton, AutomatonBuilder, Composition, Dist};
use crate::bisimulation::{parse_certificate, Certificate};
use crate::error::{Error, Result};
use crate::numerics::{ratio, Rational};

use super::clique::gen_clique;
use super::graph::{parse_graph, Graph};

pub const SIM_COARSER: &str = include_str!("../../corpus/sim-coarser.pa");
pub const SIM_COARSER_B: &str = include_str!("../../corpus/sim-coarser-b.pa");
pub const JAN_LATE: &str = include_str!("../../corpus/jan-late.pa");
pub const TRACE_JAN: &str = include_str!("../../corpus/trace-jan.pa");
pub const TRACE_LATE: &str = include_str!("../../corpus/trace-late.pa");
pub const NON_COMP_LEFT: &str = include_str!("../../corpus/non-comp-left.pa");
pub const NON_COMP_RIGHT: &str = include_str!("../../corpus/non-comp-right.pa");
pub const UNDIRECT_GRAPH: &str = include_str!("../../corpus/undirect-graph.txt");

pub const CERT_SIM_COARSER_PLAIN: &str = include_str!("../../corpus/sim-coarser.plain.cert");
pub const CERT_SIM_COARSER_B_LATE: &str = include_str!("../../corpus/sim-coarser-b.late.cert");
pub const CERT_JAN_LATE_DAGGER: &str = include_str!("../../corpus/jan-late.dagger.cert");
pub const CERT_TRACE_LATE_LATE: &str = include_str!("../../corpus/trace-late.late.cert");
pub const CERT_NON_COMP_PLAIN: &str = include_str!("../../corpus/non-comp.plain.cert");
pub const CERT_NON_COMP_DISTRIBUTED: &str = include_str!("../../corpus/non-comp.distributed.cert");

/// The synchronisation set of the composed non-compositionality fixture.
pub const NON_COMP_SYNC: [&str; 3] = ["a", "b", "c"];

/// The two-branch example with perturbations ε1, ε2 ∈ [0, 1/3]; labels are the enabled actions.
pub fn exam1(eps1: &Rational, eps2: &Rational) -> Result<Automaton> {
    let third = ratio(1, 3);
    let zero = Rational::from_integer(0.into());
    if *eps1 < zero || *eps2 < zero || *eps1 > third || *eps2 > third {
        return Err(Error::Rejected("perturbations must lie in [0, 1/3]".into()));
    }
    let mut b = AutomatonBuilder::new("exam1");
    b.actions(&["a"])?;
    b.labels_from_ea(true);
    for s in ["q", "r1", "r2", "s1", "s2", "s3", "s4", "q'", "r'", "s1'", "s2'"] {
        b.add_state::<&str>(s, &[])?;
    }
    let two_thirds = ratio(2, 3);
    let nz = |v: Vec<(&'static str, Rational)>| v.into_iter().filter(|(_, p)| *p > zero).collect::<Vec<_>>();
    b.trans("q", "a", &[("r1", ratio(1, 2)), ("r2", ratio(1, 2))])?;
    b.trans("r1", "a", &nz(vec![("s1", &two_thirds + eps1), ("s2", &third - eps1)]))?;
    b.trans("r2", "a", &nz(vec![("s3", &third - eps2), ("s4", &two_thirds + eps2)]))?;
    b.trans("s1", "a", &[("s1", ratio(1, 1))])?;
    b.trans("s3", "a", &[("s3", ratio(1, 1))])?;
    b.trans("q'", "a", &[("r'", ratio(1, 1))])?;
    b.trans("r'", "a", &[("s1'", ratio(1, 2)), ("s2'", ratio(1, 2))])?;
    b.trans("s1'", "a", &[("s1'", ratio(1, 1))])?;
    b.initial(Dist::dirac(0));
    b.build()
}

#[derive(Debug, Clone)]
pub struct ComposedPair {
    pub composition: Composition,
    pub mu: Dist,
    pub nu: Dist,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub automaton: Automaton,
    pub mu: Dist,
    pub nu: Dist,
    pub composed: Option<ComposedPair>,
    /// (relation, verdict) as documented for the example
    pub expected: Vec<(&'static str, &'static str)>,
    pub certificates: Vec<Certificate>,
    pub notes: &'static str,
}

fn pair(a: &Automaton, mu: &str, nu: &str) -> Result<(Dist, Dist)> {
    Ok((a.parse_dist(mu)?, a.parse_dist(nu)?))
}

pub fn figure_graph() -> Result<Graph> {
    parse_graph(UNDIRECT_GRAPH)
}

pub fn non_comp_composition() -> Result<Composition> {
    compose(&parse_model(NON_COMP_LEFT)?, &parse_model(NON_COMP_RIGHT)?, &NON_COMP_SYNC)
}

/// All fixtures; `exam1` uses ε1 = 1/5, ε2 = 1/10.
pub fn corpus() -> Result<Vec<Fixture>> {
    let mut out = Vec::new();

    let a = exam1(&ratio(1, 5), &ratio(1, 10))?;
    let (mu, nu) = pair(&a, "q:1", "q':1")?;
    out.push(Fixture {
        name: "exam1",
        automaton: a,
        mu,
        nu,
        composed: None,
        expected: vec![("dist", "not-bisimilar"), ("pbisim", "q and q' apart")],
        certificates: vec![],
        notes: "labels are the enabled actions; with ε1 = ε2 = 0 the Dirac pair is bisimilar",
    });

    let a = parse_model(SIM_COARSER)?;
    let (mu, nu) = pair(&a, "s1:1/2,s2:1/2", "t1:1/2,t2:1/2")?;
    out.push(Fixture {
        name: "sim-coarser",
        automaton: a,
        mu,
        nu,
        composed: None,
        expected: vec![("plain", "bisimilar"), ("late", "refuted"), ("dagger", "refuted")],
        certificates: vec![parse_certificate(CERT_SIM_COARSER_PLAIN)?],
        notes: "circle states carry `circle`, the square carries `box`",
    });

    let a = parse_model(SIM_COARSER_B)?;
    let (mu, nu) = pair(&a, "s1:1/2,s2:1/2", "t1:1/2,t2:1/2")?;
    out.push(Fixture {
        name: "sim-coarser-b",
        automaton: a,
        mu,
        nu,
        composed: None,
        expected: vec![("late", "bisimilar"), ("dagger", "refuted")],
        certificates: vec![parse_certificate(CERT_SIM_COARSER_B_LATE)?],
        notes: "s1 and t1 gain a b-step into the `other`-labelled state x",
    });

    let a = parse_model(JAN_LATE)?;
    let (mu, nu) = pair(&a, "s1:1/3,s2:1/3,s3:1/3", "t1:1/3,t2:1/3,t3:1/3")?;
    out.push(Fixture {
        name: "jan-late",
        automaton: a,
        mu,
        nu,
        composed: None,
        expected: vec![("dagger", "bisimilar"), ("late", "refuted"), ("tracedist", "witness")],
        certificates: vec![parse_certificate(CERT_JAN_LATE_DAGGER)?],
        notes: "all states carry `circle`",
    });

    let a = parse_model(TRACE_JAN)?;
    let (mu, nu) = pair(&a, "s0:1", "t0:1")?;
    out.push(Fixture {
        name: "trace-jan",
        automaton: a,
        mu,
        nu,
        composed: None,
        expected: vec![("tracedist", "equal"), ("prio", "equal"), ("plain", "refuted")],
        certificates: vec![],
        notes: "all states carry `circle`",
    });

    let a = parse_model(TRACE_LATE)?;
    let (mu, nu) = pair(&a, "s1:1/2,s2:1/2", "t0:1")?;
    out.push(Fixture {
        name: "trace-late",
        automaton: a,
        mu,
        nu,
        composed: None,
        expected: vec![("late", "bisimilar"), ("tracedist", "witness")],
        certificates: vec![parse_certificate(CERT_TRACE_LATE_LATE)?],
        notes: "all states carry `circle`; t0 reaches the same states s3..s6",
    });

    let a = parse_model(NON_COMP_LEFT)?;
    let (mu, nu) = pair(&a, "s0:1", "s5:1/2,s6:1/2")?;
    let composition = non_comp_composition()?;
    let c = &composition.automaton;
    let (cmu, cnu) = pair(c, "s0|r0:1", "s5|r0:1/2,s6|r0:1/2")?;
    out.push(Fixture {
        name: "non-comp",
        automaton: a,
        mu,
        nu,
        composed: Some(ComposedPair { composition, mu: cmu, nu: cnu }),
        expected: vec![("dist", "bisimilar"), ("composed plain", "refuted"), ("composed distributed", "bisimilar")],
        certificates: vec![parse_certificate(CERT_NON_COMP_PLAIN)?, parse_certificate(CERT_NON_COMP_DISTRIBUTED)?],
        notes: "all states carry `circle`; the composite synchronises on a, b, c",
    });

    let g = figure_graph()?;
    let a = gen_clique(&g)?;
    let mu = Dist::dirac(a.state_id("s").expect("clique start state"));
    out.push(Fixture {
        name: "clique",
        nu: mu.clone(),
        automaton: a,
        mu,
        composed: None,
        expected: vec![("max-word", "3/18")],
        certificates: vec![],
        notes: "the only accepting state t carries `acc`",
    });
    Ok(out)
}

pub fn fixture(name: &str) -> Result<Fixture> {
    corpus()?
        .into_iter()
        .find(|f| f.name == name)
        .ok_or_else(|| Error::Rejected(format!("unknown fixture `{name}`")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::classify;

    #[test]
    fn fixtures_load_and_classify() {
        for f in corpus().unwrap() {
            let _ = classify(&f.automaton);
            assert!(f.mu.is_probability() && f.nu.is_probability(), "{}", f.name);
        }
    }

    #[test]
    fn exam1_range() {
        assert!(exam1(&ratio(1, 2), &ratio(0, 1)).is_err());
        let a = exam1(&ratio(1, 3), &ratio(0, 1)).unwrap();
        assert_eq!(a.choice(1, 0, 0).len(), 1);
    }
}
