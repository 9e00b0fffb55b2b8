//! Language equivalence of reactive automata, the distribution bisimulation of reactive
//! automata, the word-difference metric, and bounded emptiness search.

use std::collections::{HashSet, VecDeque};

use num_traits::{One, Signed, Zero};

use crate::automata::{classify, direct_sum, ActionId, Automaton, Dist};
use crate::error::{max_nodes, Error, Result};
use crate::numerics::{pow, Matrix, Rational, Subspace, Vector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReactiveMatrixForm {
    /// per action, row-stochastic
    pub matrices: Vec<Matrix>,
    pub accepting: Vector,
    pub initial: Vector,
}

fn require_reactive(a: &Automaton) -> Result<()> {
    let r = classify(a);
    if r.reactive {
        return Ok(());
    }
    let why = if !r.input_enabled {
        "not input-enabled"
    } else if !r.deterministic {
        "not deterministic"
    } else {
        "a label is neither empty nor the full proposition set"
    };
    Err(Error::NotReactive(format!("`{}` is {}", a.name(), why)))
}

/// Accepting states are those labelled with the whole proposition set.
pub fn accepting_states(a: &Automaton) -> Vec<bool> {
    (0..a.num_states()).map(|s| a.label(s).len() == a.ap().len()).collect()
}

pub fn to_matrix_form(a: &Automaton) -> Result<ReactiveMatrixForm> {
    require_reactive(a)?;
    let n = a.num_states();
    let matrices = (0..a.num_actions())
        .map(|x| (0..n).map(|s| a.choice(s, x, 0).to_dense(n)).collect())
        .collect();
    let accepting = accepting_states(a)
        .into_iter()
        .map(|f| if f { Rational::one() } else { Rational::zero() })
        .collect();
    Ok(ReactiveMatrixForm { matrices, accepting, initial: a.initial().to_dense(n) })
}

fn step_row(v: &[Rational], m: &Matrix) -> Vector {
    let n = m.first().map(Vec::len).unwrap_or(0);
    let mut out = vec![Rational::zero(); n];
    for (x, row) in v.iter().zip(m) {
        if x.is_zero() {
            continue;
        }
        for (o, y) in out.iter_mut().zip(row) {
            if !y.is_zero() {
                *o += x * y;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureVerdict {
    pub equivalent: bool,
    /// shortest distinguishing word, when inequivalent
    pub witness: Option<Vec<ActionId>>,
    pub basis: Subspace,
}

/// Forward closure of `start` under the step maps, checking orthogonality to `eta`.
fn closure(start: Vector, matrices: &[Matrix], eta: &[Rational]) -> Result<ClosureVerdict> {
    let (v, _) = forward_closure(start, matrices, std::slice::from_ref(&eta.to_vec()))?;
    Ok(v)
}

/// Breadth-first forward closure; stops at the first vector with a nonzero pairing against
/// some functional and reports that functional's index.
pub fn forward_closure(start: Vector, matrices: &[Matrix], functionals: &[Vector]) -> Result<(ClosureVerdict, Option<usize>)> {
    let mut space = Subspace::new(start.len());
    let mut queue = VecDeque::new();
    queue.push_back((start, Vec::new()));
    while let Some((v, word)) = queue.pop_front() {
        if let Some(i) = functionals.iter().position(|f| !crate::numerics::dot(&v, f).is_zero()) {
            return Ok((ClosureVerdict { equivalent: false, witness: Some(word), basis: space }, Some(i)));
        }
        if !space.insert(&v)? {
            continue;
        }
        for (x, m) in matrices.iter().enumerate() {
            let mut w = word.clone();
            w.push(x);
            queue.push_back((step_row(&v, m), w));
        }
    }
    Ok((ClosureVerdict { equivalent: true, witness: None, basis: space }, None))
}

fn block_diag(m1: &Matrix, m2: &Matrix) -> Matrix {
    let (n1, n2) = (m1.len(), m2.len());
    let mut out = vec![vec![Rational::zero(); n1 + n2]; n1 + n2];
    for i in 0..n1 {
        out[i][..n1].clone_from_slice(&m1[i]);
    }
    for i in 0..n2 {
        out[n1 + i][n1..].clone_from_slice(&m2[i]);
    }
    out
}

/// Action permutation taking `a2`'s action ids into `a1`'s order.
fn align_actions(a1: &Automaton, a2: &Automaton) -> Result<Vec<ActionId>> {
    let mut same = a1.num_actions() == a2.num_actions();
    let map: Vec<ActionId> = a1
        .actions()
        .iter()
        .map(|x| a2.action_id(x).unwrap_or_else(|| {
            same = false;
            0
        }))
        .collect();
    if !same {
        return Err(Error::Rejected("the automata have different action sets".into()));
    }
    Ok(map)
}

/// Language equivalence; the witness word uses `a1`'s action ids.
pub fn rabin_equiv(a1: &Automaton, a2: &Automaton) -> Result<ClosureVerdict> {
    let map = align_actions(a1, a2)?;
    let f1 = to_matrix_form(a1)?;
    let f2 = to_matrix_form(a2)?;
    let matrices: Vec<Matrix> = (0..a1.num_actions()).map(|x| block_diag(&f1.matrices[x], &f2.matrices[map[x]])).collect();
    let mut start = f1.initial.clone();
    start.extend(f2.initial.iter().map(|p| -p));
    let mut eta = f1.accepting.clone();
    eta.extend(f2.accepting.iter().cloned());
    closure(start, &matrices, &eta)
}

pub fn doyen_bisim(a: &Automaton, mu: &Dist, nu: &Dist) -> Result<bool> {
    Ok(doyen_closure(a, mu, nu)?.equivalent)
}

pub fn doyen_closure(a: &Automaton, mu: &Dist, nu: &Dist) -> Result<ClosureVerdict> {
    let f = to_matrix_form(a)?;
    let n = a.num_states();
    let start: Vector = mu.to_dense(n).iter().zip(nu.to_dense(n)).map(|(x, y)| x - y).collect();
    closure(start, &f.matrices, &f.accepting)
}

/// States from which an accepting state is reachable by some word.
pub fn coreachable_accepting(a: &Automaton) -> Vec<bool> {
    let mut good = accepting_states(a);
    loop {
        let mut changed = false;
        for t in a.transitions() {
            if !good[t.source] && t.target.support().any(|s| good[s]) {
                good[t.source] = true;
                changed = true;
            }
        }
        if !changed {
            return good;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    Exact,
    WithinTol,
    DepthCapped,
}

impl SearchStatus {
    pub fn name(self) -> &'static str {
        match self {
            SearchStatus::Exact => "exact",
            SearchStatus::WithinTol => "within-tol",
            SearchStatus::DepthCapped => "depth-capped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordMetric {
    pub value: Rational,
    pub status: SearchStatus,
    /// a word attaining the value (first found, shortest first)
    pub witness: Vec<ActionId>,
}

fn step_dist(a: &Automaton, d: &Dist, x: ActionId) -> Dist {
    let mut out = Dist::empty();
    for (s, p) in d.iter() {
        out.add_scaled(p, a.choice(s, x, 0));
    }
    out
}

/// max over words w of γ^|w|·|A1(w) − A2(w)|, by pruned breadth-first search.
pub fn equivalence_metric_dd(a1: &Automaton, a2: &Automaton, gamma: &Rational, tol: &Rational, max_depth: usize) -> Result<WordMetric> {
    if !gamma.is_positive() || gamma > &Rational::one() {
        return Err(Error::Rejected(format!("discount {gamma} is outside (0,1]")));
    }
    let map = align_actions(a1, a2)?;
    require_reactive(a1)?;
    require_reactive(a2)?;
    if rabin_equiv(a1, a2)?.equivalent {
        // every word difference vanishes
        return Ok(WordMetric { value: Rational::zero(), status: SearchStatus::Exact, witness: Vec::new() });
    }
    let (f1, f2) = (accepting_states(a1), accepting_states(a2));
    let (c1, c2) = (coreachable_accepting(a1), coreachable_accepting(a2));
    let cap = max_nodes();
    let mut best = Rational::zero();
    let mut witness = Vec::new();
    let mut seen: HashSet<(Dist, Dist)> = HashSet::new();
    let mut level = vec![(a1.initial().clone(), a2.initial().clone(), Vec::<ActionId>::new())];
    let mut depth = 0usize;
    let mut explored = 0usize;
    while !level.is_empty() {
        let scale = pow(gamma, depth);
        if depth > 0 && gamma < &Rational::one() && scale <= *tol {
            return Ok(WordMetric { value: best, status: SearchStatus::WithinTol, witness });
        }
        if depth > max_depth {
            return Ok(WordMetric { value: best, status: SearchStatus::DepthCapped, witness });
        }
        let mut next = Vec::new();
        for (d1, d2, word) in level {
            explored += 1;
            if explored > cap {
                return Err(Error::CapExceeded { what: "word search nodes".into(), limit: cap });
            }
            let v = &scale * (d1.mass_where(|s| f1[s]) - d2.mass_where(|s| f2[s])).abs();
            if v > best {
                best = v;
                witness = word.clone();
            }
            let ceiling = {
                let r1 = d1.mass_where(|s| c1[s]);
                let r2 = d2.mass_where(|s| c2[s]);
                &scale * gamma * if r1 > r2 { r1 } else { r2 }
            };
            if ceiling <= best {
                continue;
            }
            for x in 0..a1.num_actions() {
                let n1 = step_dist(a1, &d1, x);
                let n2 = step_dist(a2, &d2, map[x]);
                if seen.insert((n1.clone(), n2.clone())) {
                    let mut w = word.clone();
                    w.push(x);
                    next.push((n1, n2, w));
                }
            }
        }
        level = next;
        depth += 1;
    }
    Ok(WordMetric { value: best, status: SearchStatus::Exact, witness })
}

/// Bounded search for a word accepted with probability strictly above `eps`.
pub fn eps_empty_search(a: &Automaton, eps: &Rational, max_len: usize) -> Result<Option<(Vec<ActionId>, Rational)>> {
    require_reactive(a)?;
    let f = accepting_states(a);
    let c = coreachable_accepting(a);
    let cap = max_nodes();
    let mut seen = HashSet::new();
    let mut level = vec![(a.initial().clone(), Vec::new())];
    let mut explored = 0usize;
    for _ in 0..=max_len {
        let mut next = Vec::new();
        for (d, word) in level {
            explored += 1;
            if explored > cap {
                return Err(Error::CapExceeded { what: "word search nodes".into(), limit: cap });
            }
            let v = d.mass_where(|s| f[s]);
            if v > *eps {
                return Ok(Some((word, v)));
            }
            if d.mass_where(|s| c[s]) <= *eps {
                continue;
            }
            for x in 0..a.num_actions() {
                let nd = step_dist(a, &d, x);
                if seen.insert(nd.clone()) {
                    let mut w = word.clone();
                    w.push(x);
                    next.push((nd, w));
                }
            }
        }
        level = next;
    }
    Ok(None)
}

/// A(w) for a reactive automaton.
pub fn word_value(a: &Automaton, word: &[ActionId]) -> Result<Rational> {
    require_reactive(a)?;
    let f = accepting_states(a);
    let mut d = a.initial().clone();
    for &x in word {
        d = step_dist(a, &d, x);
    }
    Ok(d.mass_where(|s| f[s]))
}

/// Checks the closure verdict by embedding both automata into their direct sum.
pub fn rabin_via_sum(a1: &Automaton, a2: &Automaton) -> Result<bool> {
    let sum = direct_sum(a1, a2)?;
    doyen_bisim(&sum.automaton, &sum.embed_left(a1.initial()), &sum.embed_right(a2.initial()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::parse_model;
    use crate::numerics::{int, ratio};

    fn coin() -> Automaton {
        parse_model(
            "automaton coin\nap acc\nactions a\nstate u\nstate v label acc\ninit u:1\n\
             trans u a -> u:1/2,v:1/2\ntrans v a -> v:1\n",
        )
        .unwrap()
    }

    #[test]
    fn loop_matrix() {
        let a = parse_model("automaton one\nap\nactions a\nstate u\ninit u:1\ntrans u a -> u:1\n").unwrap();
        let f = to_matrix_form(&a).unwrap();
        assert_eq!(f.matrices, vec![vec![vec![int(1)]]]);
    }

    #[test]
    fn nonreactive_rejected() {
        let a = parse_model(
            "automaton m\nap\nactions a\nstate u\ninit u:1\ntrans u a -> u:1\ntrans u a -> u:1\n",
        )
        .unwrap();
        assert!(matches!(to_matrix_form(&a), Err(Error::NotReactive(_))));
    }

    #[test]
    fn self_equivalence_and_witness() {
        let a = coin();
        assert!(rabin_equiv(&a, &a).unwrap().equivalent);
        let b = parse_model(
            "automaton coin2\nap acc\nactions a\nstate u\nstate v label acc\ninit u:1\n\
             trans u a -> u:2/3,v:1/3\ntrans v a -> v:1\n",
        )
        .unwrap();
        let v = rabin_equiv(&a, &b).unwrap();
        assert!(!v.equivalent);
        assert_eq!(v.witness, Some(vec![0]));
        assert!(!rabin_via_sum(&a, &b).unwrap());
        assert!(rabin_via_sum(&a, &a).unwrap());
    }

    #[test]
    fn doyen_depth_zero() {
        let a = coin();
        assert!(doyen_bisim(&a, &Dist::dirac(0), &Dist::dirac(0)).unwrap());
        assert!(!doyen_bisim(&a, &Dist::dirac(0), &Dist::dirac(1)).unwrap());
    }

    #[test]
    fn metric_identical_is_zero() {
        let a = coin();
        let m = equivalence_metric_dd(&a, &a, &ratio(1, 2), &ratio(1, 1000), 50).unwrap();
        assert_eq!(m.value, int(0));
        assert_eq!(m.status, SearchStatus::Exact);
        assert!(equivalence_metric_dd(&a, &a, &int(0), &ratio(1, 10), 5).is_err());
    }

    #[test]
    fn undiscounted_cyclic_caps() {
        let a = coin();
        let b = parse_model("automaton z\nap acc\nactions a\nstate u\ninit u:1\ntrans u a -> u:1\n").unwrap();
        let m = equivalence_metric_dd(&a, &b, &int(1), &ratio(1, 1000), 6).unwrap();
        assert_eq!(m.status, SearchStatus::DepthCapped);
        assert_eq!(m.value, ratio(63, 64));
    }

    #[test]
    fn emptiness() {
        let a = parse_model("automaton f\nap acc\nactions a\nstate u label acc\ninit u:1\ntrans u a -> u:1\n").unwrap();
        assert_eq!(eps_empty_search(&a, &ratio(1, 2), 3).unwrap(), Some((vec![], int(1))));
        let c = coin();
        let (w, v) = eps_empty_search(&c, &ratio(2, 3), 5).unwrap().unwrap();
        assert_eq!(w.len(), 2);
        assert_eq!(v, ratio(3, 4));
    }
}
