use std::collections::{BTreeSet, HashMap};

use super::dist::{Dist, StateId};
use crate::error::{Error, Result};
use crate::numerics::Rational;

pub type ActionId = usize;
pub type PropId = usize;
/// A label: a set of atomic-proposition indices.
pub type Label = BTreeSet<PropId>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub source: StateId,
    pub action: ActionId,
    pub target: Dist,
}

/// A finite probabilistic automaton with exact transition probabilities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    name: String,
    ap: Vec<String>,
    actions: Vec<String>,
    states: Vec<String>,
    labels: Vec<Label>,
    transitions: Vec<Transition>,
    initial: Dist,
    labels_from_ea: bool,
    // [state][action] -> transition indices in model order
    index: Vec<Vec<Vec<usize>>>,
}

impl Automaton {
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn ap(&self) -> &[String] {
        &self.ap
    }
    pub fn actions(&self) -> &[String] {
        &self.actions
    }
    pub fn state_names(&self) -> &[String] {
        &self.states
    }
    pub fn num_states(&self) -> usize {
        self.states.len()
    }
    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }
    pub fn label(&self, s: StateId) -> &Label {
        &self.labels[s]
    }
    pub fn labels(&self) -> &[Label] {
        &self.labels
    }
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }
    pub fn initial(&self) -> &Dist {
        &self.initial
    }
    pub fn labels_from_ea(&self) -> bool {
        self.labels_from_ea
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }
    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|a| a == name)
    }
    pub fn prop_id(&self, name: &str) -> Option<PropId> {
        self.ap.iter().position(|p| p == name)
    }

    /// Raw a-successors of `s`, in model order.
    pub fn choices(&self, s: StateId, a: ActionId) -> impl Iterator<Item = &Dist> + '_ {
        self.index[s][a].iter().map(move |&t| &self.transitions[t].target)
    }

    pub fn choice_count(&self, s: StateId, a: ActionId) -> usize {
        self.index[s][a].len()
    }

    pub fn choice(&self, s: StateId, a: ActionId, k: usize) -> &Dist {
        &self.transitions[self.index[s][a][k]].target
    }

    pub fn enables(&self, s: StateId, a: ActionId) -> bool {
        !self.index[s][a].is_empty()
    }

    /// EA(s), the set of enabled actions.
    pub fn enabled(&self, s: StateId) -> BTreeSet<ActionId> {
        (0..self.actions.len()).filter(|&a| self.enables(s, a)).collect()
    }

    pub fn label_names(&self, l: &Label) -> Vec<&str> {
        l.iter().map(|&p| self.ap[p].as_str()).collect()
    }

    /// Inhabited label classes, in order of first appearance over the states.
    pub fn label_classes(&self) -> Vec<Label> {
        let mut out: Vec<Label> = Vec::new();
        for l in &self.labels {
            if !out.contains(l) {
                out.push(l.clone());
            }
        }
        out
    }

    /// Parses a distribution literal `id:p,id:p` against this automaton's states.
    pub fn parse_dist(&self, text: &str) -> Result<Dist> {
        super::format::parse_dist_literal(text, 0, |n| self.state_id(n))
    }

    pub fn show_dist(&self, d: &Dist) -> String {
        d.display(&self.states).to_string()
    }

    pub fn with_name(mut self, name: &str) -> Automaton {
        self.name = name.to_string();
        self
    }
}

/// Incremental construction with validation in [`AutomatonBuilder::build`].
#[derive(Debug, Clone, Default)]
pub struct AutomatonBuilder {
    name: String,
    ap: Vec<String>,
    actions: Vec<String>,
    states: Vec<String>,
    labels: Vec<Label>,
    transitions: Vec<Transition>,
    initial: Option<Dist>,
    labels_from_ea: bool,
    state_lookup: HashMap<String, StateId>,
}

impl AutomatonBuilder {
    pub fn new(name: &str) -> Self {
        AutomatonBuilder { name: name.to_string(), ..Default::default() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: &str) {
        self.name = name.to_string();
    }

    pub fn ap<S: AsRef<str>>(&mut self, props: &[S]) -> Result<&mut Self> {
        for p in props {
            let p = p.as_ref();
            check_ident(p)?;
            if self.ap.iter().any(|q| q == p) {
                return Err(Error::InvalidModel(format!("duplicate proposition `{p}`")));
            }
            self.ap.push(p.to_string());
        }
        Ok(self)
    }

    pub fn actions<S: AsRef<str>>(&mut self, acts: &[S]) -> Result<&mut Self> {
        for a in acts {
            let a = a.as_ref();
            check_ident(a)?;
            if self.actions.iter().any(|b| b == a) {
                return Err(Error::InvalidModel(format!("duplicate action `{a}`")));
            }
            self.actions.push(a.to_string());
        }
        Ok(self)
    }

    pub fn labels_from_ea(&mut self, on: bool) -> &mut Self {
        self.labels_from_ea = on;
        self
    }

    pub fn add_state<S: AsRef<str>>(&mut self, name: &str, label: &[S]) -> Result<StateId> {
        check_ident(name)?;
        if self.state_lookup.contains_key(name) {
            return Err(Error::InvalidModel(format!("duplicate state `{name}`")));
        }
        let mut l = Label::new();
        for p in label {
            let p = p.as_ref();
            let id = self
                .ap
                .iter()
                .position(|q| q == p)
                .ok_or_else(|| Error::InvalidModel(format!("unknown proposition `{p}`")))?;
            l.insert(id);
        }
        let id = self.states.len();
        self.states.push(name.to_string());
        self.labels.push(l);
        self.state_lookup.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn add_state_with_label(&mut self, name: &str, label: Label) -> Result<StateId> {
        let id = self.add_state::<&str>(name, &[])?;
        if label.iter().any(|&p| p >= self.ap.len()) {
            return Err(Error::InvalidModel(format!("label of `{name}` uses an unknown proposition")));
        }
        self.labels[id] = label;
        Ok(id)
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_lookup.get(name).copied()
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|a| a == name)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn add_transition(&mut self, source: StateId, action: ActionId, target: Dist) -> &mut Self {
        self.transitions.push(Transition { source, action, target });
        self
    }

    /// Adds a transition named by strings; weights are exact rationals.
    pub fn trans(&mut self, source: &str, action: &str, target: &[(&str, Rational)]) -> Result<&mut Self> {
        let s = self
            .state_id(source)
            .ok_or_else(|| Error::InvalidModel(format!("unknown state `{source}`")))?;
        let a = self
            .action_id(action)
            .ok_or_else(|| Error::InvalidModel(format!("unknown action `{action}`")))?;
        let mut d = Dist::empty();
        for (n, p) in target {
            let t = self
                .state_id(n)
                .ok_or_else(|| Error::InvalidModel(format!("unknown state `{n}`")))?;
            d.add(t, p);
        }
        Ok(self.add_transition(s, a, d))
    }

    pub fn initial(&mut self, d: Dist) -> &mut Self {
        self.initial = Some(d);
        self
    }

    pub fn build(mut self) -> Result<Automaton> {
        if self.actions.is_empty() {
            return Err(Error::InvalidModel("the action set is empty".into()));
        }
        if self.states.is_empty() {
            return Err(Error::InvalidModel("no states declared".into()));
        }
        let n = self.states.len();
        for (i, t) in self.transitions.iter().enumerate() {
            if t.source >= n || t.action >= self.actions.len() || t.target.support().any(|s| s >= n) {
                return Err(Error::InvalidModel(format!("transition {i} refers to an unknown state or action")));
            }
            if !t.target.is_probability() {
                return Err(Error::InvalidModel(format!(
                    "transition {} of `{}` has mass {}, expected 1",
                    i,
                    self.states[t.source],
                    t.target.mass()
                )));
            }
        }
        let initial = self.initial.take().unwrap_or_else(|| Dist::dirac(0));
        if initial.support().any(|s| s >= n) || !initial.is_probability() {
            return Err(Error::InvalidModel(format!("initial distribution has mass {}, expected 1", initial.mass())));
        }
        let mut index = vec![vec![Vec::new(); self.actions.len()]; n];
        for (i, t) in self.transitions.iter().enumerate() {
            index[t.source][t.action].push(i);
        }
        if self.labels_from_ea {
            if !self.ap.is_empty() && self.ap != self.actions {
                return Err(Error::InvalidModel("labels-from-ea requires the propositions to be the actions".into()));
            }
            self.ap = self.actions.clone();
            for (s, l) in self.labels.iter_mut().enumerate() {
                *l = (0..self.actions.len()).filter(|&a| !index[s][a].is_empty()).collect();
            }
        }
        Ok(Automaton {
            name: self.name,
            ap: self.ap,
            actions: self.actions,
            states: self.states,
            labels: self.labels,
            transitions: self.transitions,
            initial,
            labels_from_ea: self.labels_from_ea,
            index,
        })
    }
}

pub(crate) fn check_ident(id: &str) -> Result<()> {
    let bad = id.is_empty()
        || id
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, ':' | ',' | '#' | '{' | '}' | '(' | ')' | '<' | '>' | '!' | '@' | ';'));
    if bad {
        Err(Error::InvalidModel(format!("`{id}` is not a valid identifier")))
    } else {
        Ok(())
    }
}
