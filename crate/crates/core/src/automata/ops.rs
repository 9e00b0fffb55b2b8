use std::collections::BTreeSet;

use super::dist::{Dist, StateId};
use super::model::{ActionId, Automaton, AutomatonBuilder, Label};
use crate::error::{Error, Result};
use crate::numerics::Rational;

pub const DEAD: &str = "dead";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassificationReport {
    pub input_enabled: bool,
    pub deterministic: bool,
    pub reactive: bool,
}

pub fn classify(a: &Automaton) -> ClassificationReport {
    let n = a.num_states();
    let m = a.num_actions();
    let input_enabled = (0..n).all(|s| (0..m).all(|x| a.enables(s, x)));
    let deterministic = (0..n).all(|s| (0..m).all(|x| a.choice_count(s, x) <= 1));
    let full: Label = (0..a.ap().len()).collect();
    let binary = (0..n).all(|s| a.label(s).is_empty() || *a.label(s) == full);
    ClassificationReport { input_enabled, deterministic, reactive: input_enabled && deterministic && binary }
}

/// The input-enabled extension together with the index of its dead state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extended {
    pub automaton: Automaton,
    pub bottom: StateId,
}

fn fresh_name(taken: &[String], base: &str) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

pub fn extend_input_enabled(a: &Automaton) -> Result<Automaton> {
    Ok(extend(a)?.automaton)
}

/// Adds the absorbing state `bot` labelled `{dead}` and routes every missing action to it.
pub fn extend(a: &Automaton) -> Result<Extended> {
    if a.prop_id(DEAD).is_some() {
        return Err(Error::Rejected(format!("proposition `{DEAD}` is already in use")));
    }
    let mut b = AutomatonBuilder::new(a.name());
    let mut ap: Vec<String> = a.ap().to_vec();
    ap.push(DEAD.to_string());
    b.ap(&ap)?;
    b.actions(a.actions())?;
    for s in 0..a.num_states() {
        b.add_state_with_label(&a.state_names()[s], a.label(s).clone())?;
    }
    let bottom = b.add_state(&fresh_name(a.state_names(), "bot"), &[DEAD])?;
    for t in a.transitions() {
        b.add_transition(t.source, t.action, t.target.clone());
    }
    for s in 0..a.num_states() {
        for x in 0..a.num_actions() {
            if !a.enables(s, x) {
                b.add_transition(s, x, Dist::dirac(bottom));
            }
        }
    }
    for x in 0..a.num_actions() {
        b.add_transition(bottom, x, Dist::dirac(bottom));
    }
    b.initial(a.initial().clone());
    Ok(Extended { automaton: b.build()?, bottom })
}

/// Extends `a`, or recognises an automaton that already carries a dead state.
pub fn ensure_extended(a: &Automaton) -> Result<Extended> {
    if let Some(dead) = a.prop_id(DEAD) {
        let only_dead: Label = [dead].into_iter().collect();
        let bottom = (0..a.num_states()).find(|&s| {
            *a.label(s) == only_dead
                && (0..a.num_actions()).all(|x| a.choice_count(s, x) == 1 && *a.choice(s, x, 0) == Dist::dirac(s))
        });
        return match bottom {
            Some(bottom) if classify(a).input_enabled => Ok(Extended { automaton: a.clone(), bottom }),
            _ => Err(Error::Rejected(format!("proposition `{DEAD}` is already in use"))),
        };
    }
    extend(a)
}

pub fn label_mass(a: &Automaton, mu: &Dist, class: &Label) -> Rational {
    mu.mass_where(|s| a.label(s) == class)
}

/// μ(𝔸, A): mass of states enabling some action of `acts` and carrying label `class`.
pub fn action_label_mass(a: &Automaton, mu: &Dist, acts: &BTreeSet<ActionId>, class: &Label) -> Rational {
    mu.mass_where(|s| a.label(s) == class && acts.iter().any(|&x| a.enables(s, x)))
}

/// Result of [`direct_sum`]: the union and the embeddings of both state spaces.
#[derive(Debug, Clone)]
pub struct DirectSum {
    pub automaton: Automaton,
    pub left: Vec<StateId>,
    pub right: Vec<StateId>,
}

impl DirectSum {
    pub fn embed_left(&self, d: &Dist) -> Dist {
        d.map_states(|s| self.left[s])
    }
    pub fn embed_right(&self, d: &Dist) -> Dist {
        d.map_states(|s| self.right[s])
    }
}

/// Disjoint union; names get `_1`/`_2` suffixes only when the two state sets collide.
pub fn direct_sum(a1: &Automaton, a2: &Automaton) -> Result<DirectSum> {
    let s1: BTreeSet<&String> = a1.actions().iter().collect();
    let s2: BTreeSet<&String> = a2.actions().iter().collect();
    if s1 != s2 {
        return Err(Error::Rejected("direct sum needs equal action sets".into()));
    }
    let clash = a1.state_names().iter().any(|n| a2.state_id(n).is_some());
    let mut b = AutomatonBuilder::new(&format!("{}+{}", a1.name(), a2.name()));
    let mut ap: Vec<String> = a1.ap().to_vec();
    for p in a2.ap() {
        if !ap.contains(p) {
            ap.push(p.clone());
        }
    }
    b.ap(&ap)?;
    b.actions(a1.actions())?;
    let mut maps = Vec::new();
    for (k, a) in [a1, a2].into_iter().enumerate() {
        let mut map = Vec::new();
        for s in 0..a.num_states() {
            let name = if clash { format!("{}_{}", a.state_names()[s], k + 1) } else { a.state_names()[s].clone() };
            let label: Vec<&str> = a.label_names(a.label(s));
            map.push(b.add_state(&name, &label)?);
        }
        for t in a.transitions() {
            let act = b.action_id(&a.actions()[t.action]).expect("shared action");
            b.add_transition(map[t.source], act, t.target.map_states(|s| map[s]));
        }
        maps.push(map);
    }
    let right = maps.pop().unwrap();
    let left = maps.pop().unwrap();
    b.initial(a1.initial().map_states(|s| left[s]));
    Ok(DirectSum { automaton: b.build()?, left, right })
}

/// A parallel composition with the component structure kept for distributed steps.
#[derive(Debug, Clone)]
pub struct Composition {
    pub automaton: Automaton,
    pub left: Automaton,
    pub right: Automaton,
    /// synchronised actions, as composite action ids
    pub sync: BTreeSet<ActionId>,
    /// composite action -> component action
    pub left_action: Vec<Option<ActionId>>,
    pub right_action: Vec<Option<ActionId>>,
}

impl Composition {
    pub fn pair(&self, s: StateId) -> (StateId, StateId) {
        (s / self.right.num_states(), s % self.right.num_states())
    }

    pub fn state(&self, l: StateId, r: StateId) -> StateId {
        l * self.right.num_states() + r
    }

    pub fn product(&self, d0: &Dist, d1: &Dist) -> Dist {
        let mut d = Dist::empty();
        for (s0, p0) in d0.iter() {
            for (s1, p1) in d1.iter() {
                d.add(self.state(s0, s1), &(p0 * p1));
            }
        }
        d
    }
}

pub fn parallel_compose(a0: &Automaton, a1: &Automaton, sync: &[&str]) -> Result<Automaton> {
    Ok(compose(a0, a1, sync)?.automaton)
}

/// A0 ∥𝔸 A1 with states `l|r` ordered lexicographically by (left, right).
pub fn compose(a0: &Automaton, a1: &Automaton, sync: &[&str]) -> Result<Composition> {
    for x in sync {
        if a0.action_id(x).is_none() || a1.action_id(x).is_none() {
            return Err(Error::Rejected(format!("synchronised action `{x}` is not shared by both components")));
        }
    }
    let mut actions: Vec<String> = a0.actions().to_vec();
    for x in a1.actions() {
        if !actions.contains(x) {
            actions.push(x.clone());
        }
    }
    let mut ap: Vec<String> = a0.ap().to_vec();
    for p in a1.ap() {
        if !ap.contains(p) {
            ap.push(p.clone());
        }
    }
    let mut b = AutomatonBuilder::new(&format!("{}||{}", a0.name(), a1.name()));
    b.ap(&ap)?;
    b.actions(&actions)?;
    for s0 in 0..a0.num_states() {
        for s1 in 0..a1.num_states() {
            let mut label: Vec<&str> = a0.label_names(a0.label(s0));
            label.extend(a1.label_names(a1.label(s1)));
            b.add_state(&format!("{}|{}", a0.state_names()[s0], a1.state_names()[s1]), &label)?;
        }
    }
    let sync_ids: BTreeSet<ActionId> = sync.iter().map(|x| actions.iter().position(|y| y == x).unwrap()).collect();
    let left_action: Vec<Option<ActionId>> = actions.iter().map(|x| a0.action_id(x)).collect();
    let right_action: Vec<Option<ActionId>> = actions.iter().map(|x| a1.action_id(x)).collect();
    let shell = Composition {
        automaton: a0.clone(),
        left: a0.clone(),
        right: a1.clone(),
        sync: sync_ids.clone(),
        left_action: left_action.clone(),
        right_action: right_action.clone(),
    };
    for s0 in 0..a0.num_states() {
        for s1 in 0..a1.num_states() {
            let src = shell.state(s0, s1);
            for x in 0..actions.len() {
                let mut targets: Vec<Dist> = Vec::new();
                let (la, ra) = (left_action[x], right_action[x]);
                if sync_ids.contains(&x) {
                    let (la, ra) = (la.unwrap(), ra.unwrap());
                    for c0 in a0.choices(s0, la) {
                        for c1 in a1.choices(s1, ra) {
                            targets.push(shell.product(c0, c1));
                        }
                    }
                } else {
                    if let Some(la) = la {
                        for c0 in a0.choices(s0, la) {
                            targets.push(shell.product(c0, &Dist::dirac(s1)));
                        }
                    }
                    if let Some(ra) = ra {
                        for c1 in a1.choices(s1, ra) {
                            targets.push(shell.product(&Dist::dirac(s0), c1));
                        }
                    }
                }
                let mut seen: Vec<Dist> = Vec::new();
                for t in targets {
                    if !seen.contains(&t) {
                        seen.push(t.clone());
                        b.add_transition(src, x, t);
                    }
                }
            }
        }
    }
    b.initial(shell.product(a0.initial(), a1.initial()));
    Ok(Composition { automaton: b.build()?, ..shell })
}
