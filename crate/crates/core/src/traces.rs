//! Word probabilities under optimal schedulers, bounded a-priori trace comparison, and bounded
//! trace-distribution comparison through hulls of deterministic-scheduler trace vectors.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Zero};

use crate::automata::{classify, ActionId, Automaton, Dist, StateId};
use crate::bisimulation::Side;
use crate::error::{max_nodes, Error, Result};
use crate::numerics::{hull_member, Rational, Vector};
use crate::reactive::accepting_states;

pub fn parse_word(a: &Automaton, text: &str) -> Result<Vec<ActionId>> {
    text.split(|c: char| c.is_whitespace() || c == ',' || c == '.')
        .filter(|t| !t.is_empty())
        .map(|t| a.action_id(t).ok_or_else(|| Error::Rejected(format!("unknown action `{t}`"))))
        .collect()
}

pub fn word_text(a: &Automaton, w: &[ActionId]) -> String {
    w.iter().map(|&x| a.actions()[x].as_str()).collect::<Vec<_>>().join(" ")
}

/// Per-state values of the best scheduler for `w`, by backward induction. On reactive automata
/// every word is always performed, so the run must also end in an accepting state.
fn word_values(a: &Automaton, w: &[ActionId]) -> Vector {
    let mut v: Vector = if classify(a).reactive {
        accepting_states(a).into_iter().map(|f| if f { Rational::one() } else { Rational::zero() }).collect()
    } else {
        vec![Rational::one(); a.num_states()]
    };
    for &x in w.iter().rev() {
        v = (0..a.num_states())
            .map(|s| a.choices(s, x).map(|c| c.dot(&v)).max().unwrap_or_default())
            .collect();
    }
    v
}

/// Largest probability that a scheduler performs exactly the actions of `w` from μ (and, on
/// reactive automata, accepts).
pub fn max_word_prob(a: &Automaton, mu: &Dist, w: &[ActionId]) -> Result<Rational> {
    if let Some(&x) = w.iter().find(|&&x| x >= a.num_actions()) {
        return Err(Error::Rejected(format!("action index {x} out of range")));
    }
    Ok(mu.dot(&word_values(a, w)))
}

/// Best word of length ≤ `maxlen` by optimal-scheduler probability; shortest first, then action
/// order, the first maximum wins.
pub fn best_word(a: &Automaton, mu: &Dist, maxlen: usize) -> Result<(Rational, Vec<ActionId>)> {
    let cap = max_nodes();
    let mut best = (mu.dot(&word_values(a, &[])), Vec::new());
    let mut level: Vec<Vec<ActionId>> = vec![Vec::new()];
    let mut visited = 0usize;
    for _ in 0..maxlen {
        let mut next = Vec::new();
        for w in &level {
            for x in 0..a.num_actions() {
                let mut w2 = w.clone();
                w2.push(x);
                visited += 1;
                if visited > cap {
                    return Err(Error::CapExceeded { what: format!("{visited} words"), limit: cap });
                }
                let v = mu.dot(&word_values(a, &w2));
                if v > best.0 {
                    best = (v, w2.clone());
                }
                next.push(w2);
            }
        }
        level = next;
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrioVerdict {
    EqualUpTo(usize),
    Witness { word: Vec<ActionId>, left: Rational, right: Rational },
}

/// Compares best-scheduler word probabilities on all words up to `maxlen`, shortest first.
/// Extensions of a word that both sides give probability 0 are skipped, as they stay 0.
pub fn prio_equiv_bounded(a: &Automaton, mu: &Dist, nu: &Dist, maxlen: usize) -> Result<PrioVerdict> {
    let cap = max_nodes();
    let mut level: Vec<Vec<ActionId>> = vec![Vec::new()];
    let mut visited = 0usize;
    for _ in 0..maxlen {
        let mut next = Vec::new();
        for w in &level {
            for x in 0..a.num_actions() {
                let mut w2 = w.clone();
                w2.push(x);
                visited += 1;
                if visited > cap {
                    return Err(Error::CapExceeded { what: format!("{visited} words"), limit: cap });
                }
                let v = word_values(a, &w2);
                let (l, r) = (mu.dot(&v), nu.dot(&v));
                if l != r {
                    return Ok(PrioVerdict::Witness { word: w2, left: l, right: r });
                }
                if !l.is_zero() {
                    next.push(w2);
                }
            }
        }
        level = next;
    }
    Ok(PrioVerdict::EqualUpTo(maxlen))
}

/// Trace vector: probability that the trace starts with each word of length 1..=k.
pub type TraceVector = BTreeMap<Vec<ActionId>, Rational>;

fn prefixed(x: ActionId, v: &TraceVector, w: &Rational, out: &mut TraceVector) {
    for (word, p) in v {
        let mut k = Vec::with_capacity(word.len() + 1);
        k.push(x);
        k.extend(word);
        *out.entry(k).or_default() += w * p;
    }
}

fn add_scaled(out: &mut TraceVector, w: &Rational, v: &TraceVector) {
    for (word, p) in v {
        *out.entry(word.clone()).or_default() += w * p;
    }
}

fn dedup(mut vs: Vec<TraceVector>) -> Vec<TraceVector> {
    let mut seen = BTreeSet::new();
    vs.retain(|v| seen.insert(v.clone()));
    vs
}

struct Enumerator<'a> {
    a: &'a Automaton,
    memo: HashMap<(StateId, usize), Vec<TraceVector>>,
    cap: usize,
}

impl Enumerator<'_> {
    /// All trace vectors of deterministic schedulers from `s` over `k` steps. A scheduler must
    /// pick a transition whenever the last state has one; choices at distinct histories are
    /// independent, so per-successor vector sets combine as a product.
    fn state(&mut self, s: StateId, k: usize) -> Result<Vec<TraceVector>> {
        if let Some(v) = self.memo.get(&(s, k)) {
            return Ok(v.clone());
        }
        let mut out = Vec::new();
        let mut transitions: Vec<_> = self.a.transitions().iter().filter(|t| t.source == s).collect();
        transitions.sort_by_key(|t| t.action);
        if k == 0 || transitions.is_empty() {
            out.push(TraceVector::new());
        } else {
            for t in transitions {
                let tails = self.dist(&t.target, k - 1)?;
                for tail in tails {
                    let mut v = TraceVector::new();
                    v.insert(vec![t.action], Rational::one());
                    prefixed(t.action, &tail, &Rational::one(), &mut v);
                    out.push(v);
                }
            }
            out = dedup(out);
        }
        self.memo.insert((s, k), out.clone());
        Ok(out)
    }

    fn dist(&mut self, d: &Dist, k: usize) -> Result<Vec<TraceVector>> {
        let mut acc = vec![TraceVector::new()];
        for (s, p) in d.iter() {
            let options = self.state(s, k)?;
            let total = acc.len().saturating_mul(options.len());
            if total > self.cap {
                return Err(Error::CapExceeded { what: format!("{total} scheduler trace vectors"), limit: self.cap });
            }
            let mut next = Vec::with_capacity(total);
            for base in &acc {
                for o in &options {
                    let mut v = base.clone();
                    add_scaled(&mut v, p, o);
                    next.push(v);
                }
            }
            acc = dedup(next);
        }
        Ok(acc)
    }
}

/// Distinct trace vectors of all depth-`k` deterministic schedulers from μ.
pub fn scheduler_vectors(a: &Automaton, mu: &Dist, k: usize) -> Result<Vec<TraceVector>> {
    Enumerator { a, memo: HashMap::new(), cap: max_nodes() }.dist(mu, k)
}

/// Number of depth-`k` deterministic schedulers from μ, one per choice function on reachable
/// histories.
pub fn scheduler_count(a: &Automaton, mu: &Dist, k: usize) -> u128 {
    fn state(a: &Automaton, s: StateId, k: usize, memo: &mut HashMap<(StateId, usize), u128>) -> u128 {
        if let Some(&c) = memo.get(&(s, k)) {
            return c;
        }
        let ts: Vec<_> = a.transitions().iter().filter(|t| t.source == s).collect();
        let c = if k == 0 || ts.is_empty() {
            1
        } else {
            ts.iter()
                .map(|t| t.target.support().map(|u| state(a, u, k - 1, memo)).fold(1u128, u128::saturating_mul))
                .fold(0u128, u128::saturating_add)
        };
        memo.insert((s, k), c);
        c
    }
    let mut memo = HashMap::new();
    mu.support().map(|s| state(a, s, k, &mut memo)).fold(1u128, u128::saturating_mul)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceVerdict {
    EqualUpTo(usize),
    /// a scheduler of `side` whose trace vector lies outside the other side's hull
    Witness { side: Side, vector: TraceVector },
}

pub fn trace_dist_equiv_bounded(a: &Automaton, mu: &Dist, nu: &Dist, k: usize) -> Result<TraceVerdict> {
    let left = scheduler_vectors(a, mu, k)?;
    let right = scheduler_vectors(a, nu, k)?;
    let words: BTreeSet<Vec<ActionId>> = left.iter().chain(&right).flat_map(|v| v.keys().cloned()).collect();
    let dense = |v: &TraceVector| -> Vector { words.iter().map(|w| v.get(w).cloned().unwrap_or_default()).collect() };
    let (ld, rd): (Vec<Vector>, Vec<Vector>) = (left.iter().map(dense).collect(), right.iter().map(dense).collect());
    for (side, mine, theirs, raw) in [(Side::Left, &ld, &rd, &left), (Side::Right, &rd, &ld, &right)] {
        for (v, original) in mine.iter().zip(raw) {
            if hull_member(v, theirs)?.is_none() {
                let vector = original.iter().filter(|(_, p)| !p.is_zero()).map(|(w, p)| (w.clone(), p.clone())).collect();
                return Ok(TraceVerdict::Witness { side, vector });
            }
        }
    }
    Ok(TraceVerdict::EqualUpTo(k))
}

/// Renders the full-length entries of a trace vector, e.g. `a c: 1/3, b d: 1/3`.
pub fn trace_vector_text(a: &Automaton, v: &TraceVector) -> String {
    let longest = v.keys().map(Vec::len).max().unwrap_or(0);
    v.iter()
        .filter(|(w, _)| w.len() == longest)
        .map(|(w, p)| format!("{}: {}", word_text(a, w), p))
        .collect::<Vec<_>>()
        .join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::corpus::UNDIRECT_GRAPH;
    use crate::generators::{fixture, gen_clique, parse_graph};
    use crate::numerics::ratio;

    fn word(a: &Automaton, w: &str) -> Vec<ActionId> {
        parse_word(a, w).unwrap()
    }

    #[test]
    fn word_probabilities() {
        let f = fixture("trace-jan").unwrap();
        let a = &f.automaton;
        let t0 = a.parse_dist("t0:1").unwrap();
        assert_eq!(max_word_prob(a, &t0, &[]).unwrap(), Rational::one());
        assert_eq!(max_word_prob(a, &t0, &word(a, "a b")).unwrap(), Rational::one());
        assert_eq!(max_word_prob(a, &t0, &word(a, "b")).unwrap(), Rational::zero());
    }

    #[test]
    fn clique_best_word() {
        let g = parse_graph(UNDIRECT_GRAPH).unwrap();
        let a = gen_clique(&g).unwrap();
        let s = a.parse_dist("s:1").unwrap();
        assert_eq!(max_word_prob(&a, &s, &word(&a, "tau a b c tau")).unwrap(), ratio(3, 18));
        let (v, w) = best_word(&a, &s, 6).unwrap();
        assert_eq!(v, ratio(3, 18));
        assert_eq!(word_text(&a, &w), "tau a b c tau");
    }

    #[test]
    fn prio_examples() {
        let f = fixture("trace-jan").unwrap();
        assert_eq!(prio_equiv_bounded(&f.automaton, &f.mu, &f.nu, 3).unwrap(), PrioVerdict::EqualUpTo(3));
        assert_eq!(prio_equiv_bounded(&f.automaton, &f.mu, &f.mu, 5).unwrap(), PrioVerdict::EqualUpTo(5));
        let f = fixture("non-comp").unwrap();
        let c = f.composed.as_ref().unwrap();
        // history-dependent schedulers reach the same best probability on every word:
        // a b and a c are 1/2 on both sides
        let ca = &c.composition.automaton;
        assert_eq!(prio_equiv_bounded(ca, &c.mu, &c.nu, 4).unwrap(), PrioVerdict::EqualUpTo(4));
        for w in ["a b", "a c"] {
            assert_eq!(max_word_prob(ca, &c.mu, &word(ca, w)).unwrap(), ratio(1, 2));
            assert_eq!(max_word_prob(ca, &c.nu, &word(ca, w)).unwrap(), ratio(1, 2));
        }
    }

    #[test]
    fn trace_distributions() {
        let f = fixture("trace-jan").unwrap();
        assert_eq!(trace_dist_equiv_bounded(&f.automaton, &f.mu, &f.nu, 2).unwrap(), TraceVerdict::EqualUpTo(2));

        let f = fixture("jan-late").unwrap();
        let a = &f.automaton;
        match trace_dist_equiv_bounded(a, &f.mu, &f.nu, 2).unwrap() {
            TraceVerdict::Witness { side: Side::Left, vector } => {
                assert_eq!(trace_vector_text(a, &vector), "a c: 1/3, a d: 1/3, b d: 1/3");
            }
            other => panic!("{other:?}"),
        }

        let f = fixture("trace-late").unwrap();
        let a = &f.automaton;
        match trace_dist_equiv_bounded(a, &f.mu, &f.nu, 2).unwrap() {
            TraceVerdict::Witness { side: Side::Left, vector } => {
                assert_eq!(vector.get(&word(a, "b e")), Some(&ratio(1, 2)));
                assert_eq!(vector.get(&word(a, "b d")), None);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scheduler_counts_match_enumeration() {
        for name in ["trace-jan", "jan-late", "trace-late", "sim-coarser"] {
            let f = fixture(name).unwrap();
            for k in 0..3 {
                // distinct vectors never outnumber schedulers
                let n = scheduler_vectors(&f.automaton, &f.mu, k).unwrap().len() as u128;
                assert!(n <= scheduler_count(&f.automaton, &f.mu, k), "{name} {k}");
            }
        }
        let f = fixture("jan-late").unwrap();
        // s1 has one transition, s2 two, s3 one; each successor then has one
        assert_eq!(scheduler_count(&f.automaton, &f.mu, 2), 2);
    }
}
