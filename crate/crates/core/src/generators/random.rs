use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::{Automaton, AutomatonBuilder, Dist, Label};
use crate::error::{Error, Result};
use crate::numerics::ratio;

#[derive(Debug, Clone, PartialEq)]
pub struct RandomParams {
    pub n_states: usize,
    pub n_actions: usize,
    pub max_choices: usize,
    /// probability that a given (state, action) pair is enabled
    pub density: f64,
    /// number of distinct label sets drawn from; 1 means all states are unlabelled
    pub label_classes: usize,
    pub deterministic: bool,
    pub labels_from_ea: bool,
    /// input-enabled, deterministic, labels in {∅, {acc}}
    pub reactive: bool,
    pub max_support: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            n_states: 5,
            n_actions: 2,
            max_choices: 2,
            density: 0.7,
            label_classes: 2,
            deterministic: false,
            labels_from_ea: false,
            reactive: false,
            max_support: 3,
        }
    }
}

fn random_dist(rng: &mut ChaCha8Rng, n: usize, max_support: usize) -> Dist {
    let k = rng.gen_range(1..=max_support.min(n));
    let states = sample(rng, n, k).into_vec();
    let weights: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=4)).collect();
    let total: i64 = weights.iter().sum();
    Dist::from_entries(states.into_iter().zip(weights).map(|(s, w)| (s, ratio(w, total))))
}

/// Seeded random automaton; the same parameters and seed always give the same model.
pub fn gen_random(params: &RandomParams, seed: u64) -> Result<Automaton> {
    let p = params;
    if p.n_states == 0 || p.n_actions == 0 || p.max_choices == 0 || p.max_support == 0 || p.label_classes == 0 {
        return Err(Error::Rejected("sizes must be positive".into()));
    }
    if !(0.0..=1.0).contains(&p.density) {
        return Err(Error::Rejected(format!("density {} is outside [0,1]", p.density)));
    }
    if p.reactive && p.labels_from_ea {
        return Err(Error::Rejected("reactive automata cannot take labels from enabled actions".into()));
    }
    if p.reactive && p.label_classes > 2 {
        return Err(Error::Rejected("reactive automata have at most two label classes".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = AutomatonBuilder::new("random");
    let acts: Vec<String> = (0..p.n_actions).map(|i| format!("a{i}")).collect();
    let props: Vec<String> = if p.reactive { vec!["acc".into()] } else { (1..p.label_classes).map(|i| format!("p{i}")).collect() };
    if !p.labels_from_ea {
        b.ap(&props)?;
    }
    b.actions(&acts)?;
    b.labels_from_ea(p.labels_from_ea);
    for s in 0..p.n_states {
        let class = rng.gen_range(0..p.label_classes);
        let label: Label = if p.labels_from_ea || class == 0 { Label::new() } else { [if p.reactive { 0 } else { class - 1 }].into() };
        b.add_state_with_label(&format!("x{s}"), label)?;
    }
    let one_choice = p.deterministic || p.reactive;
    for s in 0..p.n_states {
        for x in 0..p.n_actions {
            if !p.reactive && !rng.gen_bool(p.density) {
                continue;
            }
            let k = if one_choice { 1 } else { rng.gen_range(1..=p.max_choices) };
            for _ in 0..k {
                let d = random_dist(&mut rng, p.n_states, p.max_support);
                b.add_transition(s, x, d);
            }
        }
    }
    b.initial(Dist::dirac(0));
    b.build()
}

/// A random distribution over `n` states with at most `max_support` entries.
pub fn random_distribution(n: usize, max_support: usize, seed: u64) -> Dist {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_dist(&mut rng, n, max_support.max(1))
}
