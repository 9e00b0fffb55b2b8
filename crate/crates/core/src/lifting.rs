//! Lifted transitions between distributions: plain, action-set (normalised), distributed, and
//! the canonical consistency split.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_traits::{One, Zero};

use crate::automata::{ActionId, Automaton, Composition, Dist, StateId};
use crate::error::{max_nodes, Error, Result};
use crate::numerics::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StepTag {
    Action(ActionId),
    ActionSet(BTreeSet<ActionId>),
}

impl StepTag {
    pub fn display(&self, a: &Automaton) -> String {
        match self {
            StepTag::Action(x) => a.actions()[*x].clone(),
            StepTag::ActionSet(xs) => {
                format!("{{{}}}", xs.iter().map(|&x| a.actions()[x].as_str()).collect::<Vec<_>>().join(","))
            }
        }
    }
}

/// The successor set of a lifted step, kept as the vertices of its convex hull.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuccessorPolytope {
    pub source: Dist,
    pub tag: StepTag,
    pub vertices: Vec<Dist>,
}

/// One weighted support state with the raw choices it may combine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoicePart {
    pub state: StateId,
    pub weight: Rational,
    pub choices: Vec<Dist>,
}

/// Enumerates Σ weight·choice over all per-part choice functions, first part most significant.
/// Duplicates are dropped, keeping the first occurrence.
pub fn combine_vertices(parts: &[ChoicePart], fixed: &Dist) -> Result<Vec<Dist>> {
    let total: usize = parts
        .iter()
        .try_fold(1usize, |acc, p| acc.checked_mul(p.choices.len().max(1)))
        .unwrap_or(usize::MAX);
    let cap = max_nodes();
    if total > cap {
        return Err(Error::CapExceeded { what: format!("{total} successor vertices"), limit: cap });
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let mut idx = vec![0usize; parts.len()];
    loop {
        let mut v = fixed.clone();
        for (p, &k) in parts.iter().zip(&idx) {
            v.add_scaled(&p.weight, &p.choices[k]);
        }
        if seen.insert(v.clone()) {
            out.push(v);
        }
        let mut i = parts.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < parts[i].choices.len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

pub fn state_choices(a: &Automaton, s: StateId, x: ActionId) -> Vec<Dist> {
    a.choices(s, x).cloned().collect()
}

/// Per-support-state choice structure of the plain step μ →a.
pub fn step_parts(a: &Automaton, mu: &Dist, x: ActionId) -> Result<Vec<ChoicePart>> {
    mu.iter()
        .map(|(s, p)| {
            if !a.enables(s, x) {
                return Err(Error::NotEnabled { state: a.state_names()[s].clone(), action: a.actions()[x].clone() });
            }
            Ok(ChoicePart { state: s, weight: p.clone(), choices: state_choices(a, s, x) })
        })
        .collect()
}

pub fn dist_step_vertices(a: &Automaton, mu: &Dist, x: ActionId) -> Result<SuccessorPolytope> {
    let parts = step_parts(a, mu, x)?;
    Ok(SuccessorPolytope { source: mu.clone(), tag: StepTag::Action(x), vertices: combine_vertices(&parts, &Dist::empty())? })
}

/// Raw choices of `s` under any action of `acts`, ordered by action then model order.
pub fn set_choices(a: &Automaton, s: StateId, acts: &BTreeSet<ActionId>) -> Vec<Dist> {
    acts.iter().flat_map(|&x| a.choices(s, x).cloned()).collect()
}

/// Choice structure of the normalised action-set step; `None` when μ(S_𝔸) = 0.
pub fn dagger_parts(a: &Automaton, mu: &Dist, acts: &BTreeSet<ActionId>) -> Option<Vec<ChoicePart>> {
    let enabled = |s: StateId| acts.iter().any(|&x| a.enables(s, x));
    let norm = mu.mass_where(enabled);
    if norm.is_zero() {
        return None;
    }
    Some(
        mu.iter()
            .filter(|(s, _)| enabled(*s))
            .map(|(s, p)| ChoicePart { state: s, weight: p / &norm, choices: set_choices(a, s, acts) })
            .collect(),
    )
}

pub fn dagger_step(a: &Automaton, mu: &Dist, acts: &BTreeSet<ActionId>) -> Result<Option<SuccessorPolytope>> {
    if acts.is_empty() {
        return Err(Error::Rejected("the action set of a normalised step must be nonempty".into()));
    }
    let Some(parts) = dagger_parts(a, mu, acts) else { return Ok(None) };
    Ok(Some(SuccessorPolytope {
        source: mu.clone(),
        tag: StepTag::ActionSet(acts.clone()),
        vertices: combine_vertices(&parts, &Dist::empty())?,
    }))
}

/// Action sets worth attacking with: one representative per distinct family of per-state
/// enabled subsets, restricted to states in `states`.
pub fn action_set_representatives(a: &Automaton, states: &[StateId]) -> Vec<BTreeSet<ActionId>> {
    let m = a.num_actions();
    let mut seen: BTreeSet<Vec<BTreeSet<ActionId>>> = BTreeSet::new();
    let mut out = Vec::new();
    // order sets by size, then lexicographically
    let mut sets: Vec<BTreeSet<ActionId>> = (1u64..(1u64 << m))
        .map(|mask| (0..m).filter(|&i| mask & (1 << i) != 0).collect())
        .collect();
    sets.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    for set in sets {
        let sig: Vec<BTreeSet<ActionId>> = states
            .iter()
            .map(|&s| set.iter().copied().filter(|&x| a.enables(s, x)).collect())
            .collect();
        if sig.iter().all(BTreeSet::is_empty) {
            continue;
        }
        if seen.insert(sig) {
            out.push(set);
        }
    }
    out
}

/// Which component moves in a distributed step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Sync,
    Left,
    Right,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Sync => "sync",
            Mode::Left => "left",
            Mode::Right => "right",
        }
    }
}

/// Component-level choice structure of one distributed step mode.
#[derive(Debug, Clone)]
pub struct DistributedParts {
    pub mode: Mode,
    /// component-0 states that must choose, with their raw choices (component automaton)
    pub left: Vec<(StateId, Vec<Dist>)>,
    pub right: Vec<(StateId, Vec<Dist>)>,
    /// mass routed to the dead state by pairs unable to move
    pub dead_mass: Rational,
}

/// Modes available for action `x` from `mu`; `bottom` routes unmovable pairs to the dead state.
pub fn distributed_modes(comp: &Composition, mu: &Dist, x: ActionId, bottom: Option<StateId>) -> Result<Vec<DistributedParts>> {
    let (la, ra) = (comp.left_action[x], comp.right_action[x]);
    let modes: Vec<Mode> = if comp.sync.contains(&x) {
        vec![Mode::Sync]
    } else {
        [(la.is_some(), Mode::Left), (ra.is_some(), Mode::Right)]
            .into_iter()
            .filter(|(ok, _)| *ok)
            .map(|(_, m)| m)
            .collect()
    };
    let n = comp.automaton.num_states();
    let mut out = Vec::new();
    let mut first_blocker = None;
    for mode in modes {
        let mut left: BTreeMap<StateId, Vec<Dist>> = BTreeMap::new();
        let mut right: BTreeMap<StateId, Vec<Dist>> = BTreeMap::new();
        let mut dead = Rational::zero();
        let mut blocked = None;
        for (s, p) in mu.iter() {
            if s >= n {
                // already dead
                dead += p;
                continue;
            }
            let (s0, s1) = comp.pair(s);
            let ok0 = la.map(|y| comp.left.enables(s0, y)).unwrap_or(false);
            let ok1 = ra.map(|y| comp.right.enables(s1, y)).unwrap_or(false);
            let moves = match mode {
                Mode::Sync => ok0 && ok1,
                Mode::Left => ok0,
                Mode::Right => ok1,
            };
            if !moves {
                dead += p;
                blocked.get_or_insert(s);
                continue;
            }
            if mode != Mode::Right {
                left.entry(s0).or_insert_with(|| comp.left.choices(s0, la.unwrap()).cloned().collect());
            }
            if mode != Mode::Left {
                right.entry(s1).or_insert_with(|| comp.right.choices(s1, ra.unwrap()).cloned().collect());
            }
        }
        if let Some(b) = blocked {
            if bottom.is_none() {
                first_blocker.get_or_insert(b);
                continue;
            }
        }
        out.push(DistributedParts { mode, left: left.into_iter().collect(), right: right.into_iter().collect(), dead_mass: dead });
    }
    if out.is_empty() {
        let state = first_blocker.or_else(|| mu.support().next()).map(|s| comp.automaton.state_names()[s].clone()).unwrap_or_default();
        return Err(Error::NotEnabled { state, action: comp.automaton.actions()[x].clone() });
    }
    Ok(out)
}

/// The successor of `mu` when component states pick the given choice indices.
pub fn distributed_successor(
    comp: &Composition,
    mu: &Dist,
    parts: &DistributedParts,
    left_pick: &BTreeMap<StateId, Dist>,
    right_pick: &BTreeMap<StateId, Dist>,
    bottom: Option<StateId>,
) -> Dist {
    let n = comp.automaton.num_states();
    let mut out = Dist::empty();
    for (s, p) in mu.iter() {
        if s >= n {
            continue;
        }
        let (s0, s1) = comp.pair(s);
        let l = match parts.mode {
            Mode::Right => Some(Dist::dirac(s0)),
            _ => left_pick.get(&s0).cloned(),
        };
        let r = match parts.mode {
            Mode::Left => Some(Dist::dirac(s1)),
            _ => right_pick.get(&s1).cloned(),
        };
        if let (Some(l), Some(r)) = (l, r) {
            out.add_scaled(p, &comp.product(&l, &r));
        }
    }
    if let Some(b) = bottom {
        out.add(b, &parts.dead_mass);
    }
    out
}

/// Vertices of one mode, enumerating shared component choices (left states most significant).
pub fn distributed_mode_vertices(comp: &Composition, mu: &Dist, parts: &DistributedParts, bottom: Option<StateId>) -> Result<Vec<Dist>> {
    let slots: Vec<(bool, StateId, &Vec<Dist>)> = parts
        .left
        .iter()
        .map(|(s, c)| (true, *s, c))
        .chain(parts.right.iter().map(|(s, c)| (false, *s, c)))
        .collect();
    let total = slots.iter().try_fold(1usize, |acc, (_, _, c)| acc.checked_mul(c.len().max(1))).unwrap_or(usize::MAX);
    let cap = max_nodes();
    if total > cap {
        return Err(Error::CapExceeded { what: format!("{total} distributed vertices"), limit: cap });
    }
    let mut idx = vec![0usize; slots.len()];
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    loop {
        let mut lp = BTreeMap::new();
        let mut rp = BTreeMap::new();
        for ((is_left, s, c), &k) in slots.iter().zip(&idx) {
            if *is_left {
                lp.insert(*s, c[k].clone());
            } else {
                rp.insert(*s, c[k].clone());
            }
        }
        let v = distributed_successor(comp, mu, parts, &lp, &rp, bottom);
        if seen.insert(v.clone()) {
            out.push(v);
        }
        let mut i = slots.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < slots[i].2.len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Distributed successors of `mu` under `x`; states of `mu` at or beyond the composite's
/// state count are treated as the dead state `bottom`.
pub fn distributed_step_vertices(comp: &Composition, mu: &Dist, x: ActionId, bottom: Option<StateId>) -> Result<SuccessorPolytope> {
    let mut vertices = Vec::new();
    let mut seen = HashSet::new();
    for parts in distributed_modes(comp, mu, x, bottom)? {
        for v in distributed_mode_vertices(comp, mu, &parts, bottom)? {
            if seen.insert(v.clone()) {
                vertices.push(v);
            }
        }
    }
    Ok(SuccessorPolytope { source: mu.clone(), tag: StepTag::Action(x), vertices })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitResult {
    pub components: Vec<(Rational, Dist)>,
    pub signatures: Vec<BTreeSet<ActionId>>,
}

pub fn is_consistent(a: &Automaton, mu: &Dist) -> bool {
    let mut sigs = mu.support().map(|s| a.enabled(s));
    match sigs.next() {
        None => true,
        Some(first) => sigs.all(|s| s == first),
    }
}

/// Groups the support by enabled-action signature; parts are normalised and ordered by signature.
pub fn canonical_split(a: &Automaton, mu: &Dist) -> SplitResult {
    let mut groups: BTreeMap<BTreeSet<ActionId>, Dist> = BTreeMap::new();
    for (s, p) in mu.iter() {
        groups.entry(a.enabled(s)).or_default().add(s, p);
    }
    let mut components = Vec::new();
    let mut signatures = Vec::new();
    for (sig, part) in groups {
        let w = part.mass();
        let inv = Rational::one() / &w;
        components.push((w, part.scaled(&inv)));
        signatures.push(sig);
    }
    SplitResult { components, signatures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{compose, parse_model};
    use crate::numerics::ratio;

    fn sim_coarser() -> Automaton {
        parse_model(
            "automaton sc\nap circle box\nactions a b\n\
             state s1 label circle\nstate s2 label circle\nstate s3 label circle\nstate s4 label box\n\
             init s1:1\n\
             trans s1 a -> s3:1\ntrans s1 a -> s4:1\ntrans s2 a -> s3:1\ntrans s2 b -> s4:1\n",
        )
        .unwrap()
    }

    #[test]
    fn raw_choices() {
        let a = sim_coarser();
        assert_eq!(state_choices(&a, 0, 0), vec![Dist::dirac(2), Dist::dirac(3)]);
        assert_eq!(state_choices(&a, 1, 0), vec![Dist::dirac(2)]);
        assert!(state_choices(&a, 0, 1).is_empty());
    }

    #[test]
    fn product_enumeration_dedups() {
        let a = parse_model(
            "automaton p\nap\nactions a\nstate u\nstate v\nstate x\nstate y\ninit u:1\n\
             trans u a -> x:1\ntrans u a -> y:1\n\
             trans v a -> x:1\ntrans v a -> y:1\ntrans v a -> x:1/2,y:1/2\n",
        )
        .unwrap();
        let mu = Dist::from_entries([(0, ratio(1, 2)), (1, ratio(1, 2))]);
        let p = dist_step_vertices(&a, &mu, 0).unwrap();
        // (x,x) (x,y) (x,mid) (y,x) (y,y) (y,mid): (x,y) and (y,x) coincide
        assert_eq!(p.vertices.len(), 5);
        assert_eq!(p.vertices[0], Dist::dirac(2));
        assert!(dist_step_vertices(&a, &Dist::dirac(2), 0).is_err());
    }

    #[test]
    fn dagger_reaches_box_with_certainty() {
        let a = sim_coarser();
        let mu = Dist::from_entries([(0, ratio(1, 2)), (1, ratio(1, 2))]);
        let ab: BTreeSet<_> = [0, 1].into_iter().collect();
        let p = dagger_step(&a, &mu, &ab).unwrap().unwrap();
        assert!(p.vertices.contains(&Dist::dirac(3)));
        let only_b: BTreeSet<_> = [1].into_iter().collect();
        let q = dagger_step(&a, &Dist::dirac(1), &only_b).unwrap().unwrap();
        assert_eq!(q.vertices, vec![Dist::dirac(3)]);
        assert!(dagger_step(&a, &Dist::dirac(0), &only_b).unwrap().is_none());
    }

    #[test]
    fn splits() {
        let a = sim_coarser();
        let mu = Dist::from_entries([(0, ratio(1, 2)), (1, ratio(1, 2))]);
        let sp = canonical_split(&a, &mu);
        assert_eq!(sp.components, vec![(ratio(1, 2), Dist::dirac(0)), (ratio(1, 2), Dist::dirac(1))]);
        assert!(!is_consistent(&a, &mu));
        assert_eq!(canonical_split(&a, &Dist::dirac(2)).components.len(), 1);
    }

    #[test]
    fn distributed_shares_component_choices() {
        let left = parse_model(
            "automaton l\nap\nactions a b c\nstate s1\nstate s2\nstate s5\nstate s6\ninit s5:1/2,s6:1/2\n\
             trans s5 a -> s1:1\ntrans s6 a -> s2:1\n",
        )
        .unwrap();
        let right = parse_model(
            "automaton r\nap\nactions a b c\nstate r0\nstate r1\nstate r2\ninit r0:1\n\
             trans r0 a -> r1:1\ntrans r0 a -> r2:1\n",
        )
        .unwrap();
        let c = compose(&left, &right, &["a", "b", "c"]).unwrap();
        let mu = c.automaton.initial().clone();
        let d = distributed_step_vertices(&c, &mu, 0, None).unwrap();
        assert_eq!(d.vertices.len(), 2);
        let plain = dist_step_vertices(&c.automaton, &mu, 0).unwrap();
        assert_eq!(plain.vertices.len(), 4);
        assert!(distributed_step_vertices(&c, &mu, 1, None).is_err());
    }
}
