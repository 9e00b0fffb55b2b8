//! Bounded refutation games for the four distribution-based bisimulations.
//!
//! The defender is checked against affine invariants: per-state value vectors whose
//! pairings with a distribution must agree on related pairs. Level 0 holds the local class
//! indicators; level j+1 adds, for every step kind, the best and worst expected level-j value
//! reachable in one step. A defender that cannot reproduce the attacker's invariant values
//! has no matching move, so every reported counterexample is sound.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::automata::{ensure_extended, ActionId, Automaton, Composition, Dist, Label, StateId};
use crate::error::{max_nodes, Error, Result};
use crate::lifting::{
    action_set_representatives, canonical_split, combine_vertices, dagger_parts, distributed_step_vertices,
    is_consistent, set_choices, step_parts, ChoicePart, StepTag,
};
use crate::numerics::{lp_solve, Constraint, LinearProgram, LpOutcome, Rational, Relation, Sense, Subspace, Vector};

const VECTOR_CAP: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Semantics {
    Plain,
    Late,
    Dagger,
    Distributed,
}

impl Semantics {
    pub fn name(self) -> &'static str {
        match self {
            Semantics::Plain => "plain",
            Semantics::Late => "late",
            Semantics::Dagger => "dagger",
            Semantics::Distributed => "distributed",
        }
    }
}

impl FromStr for Semantics {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" | "dist" => Ok(Semantics::Plain),
            "late" => Ok(Semantics::Late),
            "dagger" => Ok(Semantics::Dagger),
            "distributed" => Ok(Semantics::Distributed),
            other => Err(Error::Rejected(format!("unknown semantics `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// How a defender may answer one attacker step.
#[derive(Debug, Clone)]
pub enum Defender {
    /// per-support-state convex choices
    Parts(Vec<ChoicePart>),
    /// convex hull of explicit points
    Hull(Vec<Dist>),
    /// no step of this kind exists
    Blocked,
}

impl Defender {
    pub fn unique(&self) -> Option<Dist> {
        match self {
            Defender::Parts(parts) if parts.iter().all(|p| p.choices.len() == 1) => {
                Some(Dist::combine(parts.iter().map(|p| (&p.weight, &p.choices[0]))))
            }
            Defender::Hull(v) if v.len() == 1 => Some(v[0].clone()),
            _ => None,
        }
    }
}

/// One attacker step kind from a given distribution with its vertex list.
#[derive(Debug, Clone)]
pub struct Attack {
    pub tag: StepTag,
    pub vertices: Vec<Dist>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DefenderFailure {
    /// the defender has no step of the attacked kind
    Blocked,
    /// no defender step reproduces the attacker's invariants of this level
    Unmatchable { level: usize },
    /// the defender's step is forced and the successor pair is refuted
    Forced { response: Dist, then: Box<Counterexample> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Counterexample {
    Local { left: Dist, right: Dist, class: String, left_mass: Rational, right_mass: Rational },
    Split { left: Dist, right: Dist, weight: Rational, signature: String, then: Box<Counterexample> },
    Step { left: Dist, right: Dist, attacker: Side, tag: String, vertex: usize, successor: Dist, failure: DefenderFailure },
}

impl Counterexample {
    /// Number of attacker steps plus the level of the final invariant; splits are free.
    pub fn depth(&self) -> usize {
        match self {
            Counterexample::Local { .. } => 0,
            Counterexample::Split { then, .. } => then.depth(),
            Counterexample::Step { failure, .. } => {
                1 + match failure {
                    DefenderFailure::Blocked => 0,
                    DefenderFailure::Unmatchable { level } => *level,
                    DefenderFailure::Forced { then, .. } => then.depth(),
                }
            }
        }
    }

    pub fn render(&self, names: &[String]) -> String {
        let mut out = String::new();
        self.render_into(names, 0, &mut out);
        out
    }

    fn render_into(&self, names: &[String], indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        let d = |x: &Dist| x.display(names).to_string();
        match self {
            Counterexample::Local { left, right, class, left_mass, right_mass } => {
                writeln!(out, "{pad}pair {} vs {}: {class} mass {left_mass} vs {right_mass}", d(left), d(right)).unwrap();
            }
            Counterexample::Split { left, right, weight, signature, then } => {
                writeln!(out, "{pad}pair {} vs {}: split part {signature} of weight {weight}", d(left), d(right)).unwrap();
                then.render_into(names, indent + 1, out);
            }
            Counterexample::Step { left, right, attacker, tag, vertex, successor, failure } => {
                let who = if *attacker == Side::Left { "left" } else { "right" };
                writeln!(out, "{pad}pair {} vs {}: {who} moves {tag} (vertex {vertex}) to {}", d(left), d(right), d(successor)).unwrap();
                match failure {
                    DefenderFailure::Blocked => writeln!(out, "{pad}  defender cannot move").unwrap(),
                    DefenderFailure::Unmatchable { level } => {
                        writeln!(out, "{pad}  no defender move matches the level-{level} invariants").unwrap()
                    }
                    DefenderFailure::Forced { response, then } => {
                        writeln!(out, "{pad}  defender forced to {}", d(response)).unwrap();
                        then.render_into(names, indent + 1, out);
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RefuteOutcome {
    Refuted(Counterexample),
    NoViolationUpTo(usize),
}

/// The game graph for one semantics, with lazily built invariant levels.
pub struct Game<'a> {
    pub semantics: Semantics,
    pub graph: Automaton,
    pub bottom: Option<StateId>,
    comp: Option<&'a Composition>,
    local: Vec<(String, Vector)>,
    // cumulative vectors and the index where each level's new vectors start
    vectors: RefCell<Vec<Vector>>,
    starts: RefCell<Vec<usize>>,
    spans: RefCell<Vec<Subspace>>,
    nodes: RefCell<usize>,
    // pairs already explored to a depth without finding a counterexample
    safe: RefCell<HashMap<(Dist, Dist), usize>>,
}

fn indicator(n: usize, pred: impl Fn(StateId) -> bool) -> Vector {
    (0..n).map(|s| if pred(s) { Rational::one() } else { Rational::zero() }).collect()
}

impl<'a> Game<'a> {
    /// Builds the game. Plain and distributed games run on the input-enabled extension.
    pub fn new(a: &Automaton, semantics: Semantics, comp: Option<&'a Composition>) -> Result<Self> {
        let (graph, bottom) = match semantics {
            Semantics::Plain => {
                let e = ensure_extended(a)?;
                (e.automaton, Some(e.bottom))
            }
            Semantics::Late | Semantics::Dagger => (a.clone(), None),
            Semantics::Distributed => {
                let c = comp.ok_or_else(|| Error::Rejected("distributed semantics needs a composition".into()))?;
                let e = ensure_extended(&c.automaton)?;
                (e.automaton, Some(e.bottom))
            }
        };
        let n = graph.num_states();
        let label_text = |l: &Label| format!("{{{}}}", graph.label_names(l).join(","));
        let mut local = Vec::new();
        match semantics {
            Semantics::Plain | Semantics::Distributed => {
                for l in graph.label_classes() {
                    local.push((format!("label {}", label_text(&l)), indicator(n, |s| *graph.label(s) == l)));
                }
            }
            Semantics::Late | Semantics::Dagger => {
                let mut seen: Vec<(BTreeSet<ActionId>, Label)> = Vec::new();
                for s in 0..n {
                    let key = (graph.enabled(s), graph.label(s).clone());
                    if !seen.contains(&key) {
                        seen.push(key);
                    }
                }
                for (sig, l) in seen {
                    let desc = format!("enabled {} label {}", action_set_text(&graph, &sig), label_text(&l));
                    local.push((desc, indicator(n, |s| graph.enabled(s) == sig && *graph.label(s) == l)));
                }
            }
        }
        let vectors: Vec<Vector> = local.iter().map(|(_, v)| v.clone()).collect();
        let mut span = Subspace::new(n);
        for v in &vectors {
            span.insert(v)?;
        }
        Ok(Game {
            semantics,
            graph,
            bottom,
            comp,
            local,
            vectors: RefCell::new(vectors),
            starts: RefCell::new(vec![0]),
            spans: RefCell::new(vec![span]),
            nodes: RefCell::new(0),
            safe: RefCell::new(HashMap::new()),
        })
    }

    pub fn local_classes(&self) -> &[(String, Vector)] {
        &self.local
    }

    pub fn names(&self) -> &[String] {
        self.graph.state_names()
    }

    /// Raw per-state value transforms: for each step kind, (states it applies to, choices).
    fn transforms(&self) -> Vec<Vec<Option<Vec<Dist>>>> {
        let g = &self.graph;
        let n = g.num_states();
        let mut out = Vec::new();
        match self.semantics {
            Semantics::Plain => {
                for x in 0..g.num_actions() {
                    out.push((0..n).map(|s| Some(g.choices(s, x).cloned().collect())).collect());
                }
            }
            Semantics::Late => {
                let sigs: BTreeSet<BTreeSet<ActionId>> = (0..n).map(|s| g.enabled(s)).collect();
                for sig in sigs {
                    for &x in &sig {
                        out.push(
                            (0..n).map(|s| if g.enabled(s) == sig { Some(g.choices(s, x).cloned().collect()) } else { None }).collect(),
                        );
                    }
                }
            }
            Semantics::Dagger => {
                let all: Vec<StateId> = (0..n).collect();
                for set in action_set_representatives(g, &all) {
                    out.push(
                        (0..n)
                            .map(|s| {
                                let c = set_choices(g, s, &set);
                                if c.is_empty() {
                                    None
                                } else {
                                    Some(c)
                                }
                            })
                            .collect(),
                    );
                }
            }
            Semantics::Distributed => {}
        }
        out
    }

    fn ensure_level(&self, j: usize) -> Result<()> {
        while self.starts.borrow().len() <= j {
            let transforms = self.transforms();
            let n = self.graph.num_states();
            let mut vectors = self.vectors.borrow_mut();
            let mut starts = self.starts.borrow_mut();
            let from = *starts.last().unwrap();
            let to = vectors.len();
            let mut seen: HashSet<Vector> = vectors.iter().cloned().collect();
            let mut span = self.spans.borrow().last().unwrap().clone();
            starts.push(to);
            'outer: for i in from..to {
                for t in &transforms {
                    let v = vectors[i].clone();
                    let mut hi = vec![Rational::zero(); n];
                    let mut lo = vec![Rational::zero(); n];
                    for s in 0..n {
                        if let Some(choices) = &t[s] {
                            let vals: Vec<Rational> = choices.iter().map(|c| c.dot(&v)).collect();
                            hi[s] = vals.iter().max().cloned().unwrap_or_default();
                            lo[s] = vals.iter().min().cloned().unwrap_or_default();
                        }
                    }
                    for w in [hi, lo] {
                        if vectors.len() >= VECTOR_CAP {
                            break 'outer;
                        }
                        if !w.iter().all(Zero::is_zero) && seen.insert(w.clone()) {
                            span.insert(&w)?;
                            vectors.push(w);
                        }
                    }
                }
            }
            self.spans.borrow_mut().push(span);
        }
        Ok(())
    }

    fn span(&self, j: usize) -> Result<Subspace> {
        self.ensure_level(j)?;
        Ok(self.spans.borrow()[j].clone())
    }

    /// Whether some defender step agrees with `target` on every level-`j` invariant.
    pub fn defender_matches(&self, defender: &Defender, target: &Dist, j: usize) -> Result<bool> {
        let span = self.span(j)?;
        let rows: Vec<&Vector> = span.basis().collect();
        if let Some(point) = defender.unique() {
            return Ok(rows.iter().all(|v| point.dot(v) == target.dot(v)));
        }
        let mut cols: Vec<(usize, Dist, Rational)> = Vec::new();
        let groups = match defender {
            Defender::Parts(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    for c in &p.choices {
                        cols.push((i, c.clone(), p.weight.clone()));
                    }
                }
                parts.len()
            }
            Defender::Hull(points) => {
                for p in points {
                    cols.push((0, p.clone(), Rational::one()));
                }
                1
            }
            Defender::Blocked => return Ok(false),
        };
        let nv = cols.len();
        let mut constraints = Vec::new();
        for g in 0..groups {
            let coeffs = cols.iter().map(|(i, _, _)| if *i == g { Rational::one() } else { Rational::zero() }).collect();
            constraints.push(Constraint::new(coeffs, Relation::Eq, Rational::one()));
        }
        for v in rows {
            let coeffs: Vector = cols.iter().map(|(_, c, w)| w * c.dot(v)).collect();
            constraints.push(Constraint::new(coeffs, Relation::Eq, target.dot(v)));
        }
        let lp = LinearProgram { num_vars: nv, objective: vec![Rational::zero(); nv], sense: Sense::Minimize, constraints };
        Ok(matches!(lp_solve(&lp)?, LpOutcome::Optimal { .. }))
    }

    /// First local class whose masses differ.
    pub fn local_mismatch(&self, mu: &Dist, nu: &Dist) -> Option<(String, Rational, Rational)> {
        self.local.iter().find_map(|(desc, v)| {
            let (l, r) = (mu.dot(v), nu.dot(v));
            (l != r).then(|| (desc.clone(), l, r))
        })
    }

    /// Attacker step kinds from `att`, in exploration order, with the matching defender structure.
    pub fn attacks(&self, att: &Dist, def: &Dist) -> Result<Vec<(Attack, Defender)>> {
        let g = &self.graph;
        let mut out = Vec::new();
        match self.semantics {
            Semantics::Plain => {
                for x in 0..g.num_actions() {
                    let parts = step_parts(g, att, x)?;
                    let vertices = combine_vertices(&parts, &Dist::empty())?;
                    out.push((Attack { tag: StepTag::Action(x), vertices }, Defender::Parts(step_parts(g, def, x)?)));
                }
            }
            Semantics::Late => {
                let Some(s0) = att.support().next() else { return Ok(out) };
                for x in g.enabled(s0) {
                    let parts = step_parts(g, att, x)?;
                    let vertices = combine_vertices(&parts, &Dist::empty())?;
                    let defender = match step_parts(g, def, x) {
                        Ok(p) => Defender::Parts(p),
                        Err(Error::NotEnabled { .. }) => Defender::Blocked,
                        Err(e) => return Err(e),
                    };
                    out.push((Attack { tag: StepTag::Action(x), vertices }, defender));
                }
            }
            Semantics::Dagger => {
                let states: Vec<StateId> = att.support().chain(def.support()).collect::<BTreeSet<_>>().into_iter().collect();
                for set in action_set_representatives(g, &states) {
                    let Some(parts) = dagger_parts(g, att, &set) else { continue };
                    let vertices = combine_vertices(&parts, &Dist::empty())?;
                    let defender = dagger_parts(g, def, &set).map(Defender::Parts).unwrap_or(Defender::Blocked);
                    out.push((Attack { tag: StepTag::ActionSet(set), vertices }, defender));
                }
            }
            Semantics::Distributed => {
                let comp = self.comp.expect("distributed game has a composition");
                for x in 0..g.num_actions() {
                    let vertices = distributed_step_vertices(comp, att, x, self.bottom)?.vertices;
                    let defender = Defender::Hull(distributed_step_vertices(comp, def, x, self.bottom)?.vertices);
                    out.push((Attack { tag: StepTag::Action(x), vertices }, defender));
                }
            }
        }
        Ok(out)
    }

    fn tick(&self) -> Result<()> {
        let mut n = self.nodes.borrow_mut();
        *n += 1;
        let cap = max_nodes();
        if *n > cap {
            return Err(Error::CapExceeded { what: "refutation game nodes".into(), limit: cap });
        }
        Ok(())
    }

    fn find(&self, mu: &Dist, nu: &Dist, k: usize) -> Result<Option<Counterexample>> {
        if mu == nu {
            return Ok(None);
        }
        let key = (mu.clone(), nu.clone());
        if self.safe.borrow().get(&key).is_some_and(|&d| d >= k) {
            return Ok(None);
        }
        let found = self.find_uncached(mu, nu, k)?;
        if found.is_none() {
            self.safe.borrow_mut().insert(key, k);
        }
        Ok(found)
    }

    fn find_uncached(&self, mu: &Dist, nu: &Dist, k: usize) -> Result<Option<Counterexample>> {
        self.tick()?;
        if let Some((class, l, r)) = self.local_mismatch(mu, nu) {
            return Ok(Some(Counterexample::Local { left: mu.clone(), right: nu.clone(), class, left_mass: l, right_mass: r }));
        }
        if self.semantics == Semantics::Late && (!is_consistent(&self.graph, mu) || !is_consistent(&self.graph, nu)) {
            let ls = canonical_split(&self.graph, mu);
            let rs = canonical_split(&self.graph, nu);
            for ((w, lp), sig) in ls.components.iter().zip(&ls.signatures) {
                let Some(i) = rs.signatures.iter().position(|s| s == sig) else { continue };
                let rp = &rs.components[i].1;
                if let Some(c) = self.find(lp, rp, k)? {
                    return Ok(Some(Counterexample::Split {
                        left: mu.clone(),
                        right: nu.clone(),
                        weight: w.clone(),
                        signature: format!("enabled {}", action_set_text(&self.graph, sig)),
                        then: Box::new(c),
                    }));
                }
            }
            return Ok(None);
        }
        if k == 0 {
            return Ok(None);
        }
        for side in [Side::Left, Side::Right] {
            let (att, def) = if side == Side::Left { (mu, nu) } else { (nu, mu) };
            for (attack, defender) in self.attacks(att, def)? {
                let tag = attack.tag.display(&self.graph);
                for (vi, v) in attack.vertices.iter().enumerate() {
                    let step = |failure| Counterexample::Step {
                        left: mu.clone(),
                        right: nu.clone(),
                        attacker: side,
                        tag: tag.clone(),
                        vertex: vi,
                        successor: v.clone(),
                        failure,
                    };
                    if let Defender::Blocked = defender {
                        return Ok(Some(step(DefenderFailure::Blocked)));
                    }
                    if !self.defender_matches(&defender, v, k - 1)? {
                        let mut level = k - 1;
                        for j in 0..k - 1 {
                            if !self.defender_matches(&defender, v, j)? {
                                level = j;
                                break;
                            }
                        }
                        return Ok(Some(step(DefenderFailure::Unmatchable { level })));
                    }
                    if let Some(response) = defender.unique() {
                        if let Some(c) = self.find(v, &response, k - 1)? {
                            return Ok(Some(step(DefenderFailure::Forced { response, then: Box::new(c) })));
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    /// Iterative deepening up to `depth`; the first counterexample found has minimal depth
    /// among those this search can certify.
    pub fn refute(&self, mu: &Dist, nu: &Dist, depth: usize) -> Result<RefuteOutcome> {
        for k in 0..=depth {
            if let Some(c) = self.find(mu, nu, k)? {
                return Ok(RefuteOutcome::Refuted(c));
            }
        }
        Ok(RefuteOutcome::NoViolationUpTo(depth))
    }
}

pub fn action_set_text(a: &Automaton, set: &BTreeSet<ActionId>) -> String {
    format!("{{{}}}", set.iter().map(|&x| a.actions()[x].as_str()).collect::<Vec<_>>().join(","))
}

/// Bounded refutation of μ ≈ ν in the chosen semantics. Distributions are over `a`'s states
/// (over the composite's states for the distributed semantics, with `comp` supplied).
pub fn dist_bisim_refute(
    a: &Automaton,
    mu: &Dist,
    nu: &Dist,
    semantics: Semantics,
    depth: usize,
    comp: Option<&Composition>,
) -> Result<(RefuteOutcome, Vec<String>)> {
    let game = Game::new(a, semantics, comp)?;
    let out = game.refute(mu, nu, depth)?;
    Ok((out, game.names().to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::corpus::fixture;

    fn refute(name: &str, sem: Semantics, depth: usize) -> RefuteOutcome {
        let f = fixture(name).unwrap();
        dist_bisim_refute(&f.automaton, &f.mu, &f.nu, sem, depth, None).unwrap().0
    }

    fn depth_of(o: &RefuteOutcome) -> Option<usize> {
        match o {
            RefuteOutcome::Refuted(c) => Some(c.depth()),
            RefuteOutcome::NoViolationUpTo(_) => None,
        }
    }

    #[test]
    fn sim_coarser_matrix() {
        assert_eq!(refute("sim-coarser", Semantics::Plain, 6), RefuteOutcome::NoViolationUpTo(6));
        assert_eq!(depth_of(&refute("sim-coarser", Semantics::Late, 2)), Some(1));
        let dagger = refute("sim-coarser", Semantics::Dagger, 2);
        assert_eq!(depth_of(&dagger), Some(1));
        let RefuteOutcome::Refuted(Counterexample::Step { tag, .. }) = dagger else { panic!("{dagger:?}") };
        assert_eq!(tag, "{a,b}");
    }

    #[test]
    fn late_and_dagger_variants() {
        assert_eq!(depth_of(&refute("jan-late", Semantics::Late, 1)), Some(1));
        assert_eq!(refute("jan-late", Semantics::Dagger, 4), RefuteOutcome::NoViolationUpTo(4));
        assert_eq!(refute("sim-coarser-b", Semantics::Late, 4), RefuteOutcome::NoViolationUpTo(4));
        let d = refute("sim-coarser-b", Semantics::Dagger, 2);
        let RefuteOutcome::Refuted(Counterexample::Step { tag, .. }) = d else { panic!("{d:?}") };
        assert_eq!(tag, "{a,b}");
        assert_eq!(refute("trace-late", Semantics::Late, 4), RefuteOutcome::NoViolationUpTo(4));
    }

    #[test]
    fn trace_jan_plain_depth_two() {
        assert_eq!(depth_of(&refute("trace-jan", Semantics::Plain, 2)), Some(2));
        assert_eq!(refute("trace-jan", Semantics::Plain, 1), RefuteOutcome::NoViolationUpTo(1));
    }

    #[test]
    fn non_comp_composed() {
        let f = fixture("non-comp").unwrap();
        assert_eq!(dist_bisim_refute(&f.automaton, &f.mu, &f.nu, Semantics::Plain, 4, None).unwrap().0, RefuteOutcome::NoViolationUpTo(4));
        let c = f.composed.unwrap();
        let a = &c.composition.automaton;
        let (plain, names) = dist_bisim_refute(a, &c.mu, &c.nu, Semantics::Plain, 4, None).unwrap();
        assert_eq!(depth_of(&plain), Some(2));
        let RefuteOutcome::Refuted(cx) = &plain else { unreachable!() };
        assert!(cx.render(&names).contains("moves a"));
        let (dist, _) = dist_bisim_refute(a, &c.mu, &c.nu, Semantics::Distributed, 8, Some(&c.composition)).unwrap();
        assert_eq!(dist, RefuteOutcome::NoViolationUpTo(8));
    }

    #[test]
    fn local_mismatch_is_depth_zero() {
        let f = fixture("sim-coarser").unwrap();
        let a = &f.automaton;
        let o = dist_bisim_refute(a, &Dist::dirac(a.state_id("s3").unwrap()), &Dist::dirac(a.state_id("s4").unwrap()), Semantics::Plain, 3, None)
            .unwrap()
            .0;
        assert_eq!(depth_of(&o), Some(0));
    }

    #[test]
    fn unknown_semantics_rejected() {
        assert!("weak".parse::<Semantics>().is_err());
        assert_eq!("dist".parse::<Semantics>().unwrap(), Semantics::Plain);
    }
}
