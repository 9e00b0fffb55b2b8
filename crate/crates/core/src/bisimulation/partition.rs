use crate::automata::{ActionId, Automaton, Dist, StateId};
use crate::error::Result;
use crate::numerics::{hull_member, Rational, Vector};

/// Blocks of an equivalence on states, each sorted, ordered by smallest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub blocks: Vec<Vec<StateId>>,
}

impl Partition {
    pub fn block_of(&self, s: StateId) -> usize {
        self.blocks.iter().position(|b| b.contains(&s)).expect("partition covers every state")
    }

    pub fn same_block(&self, s: StateId, t: StateId) -> bool {
        self.block_of(s) == self.block_of(t)
    }

    pub fn from_assignment(assign: &[usize]) -> Partition {
        let mut blocks: Vec<Vec<StateId>> = Vec::new();
        let mut ids: Vec<usize> = Vec::new();
        for (s, &b) in assign.iter().enumerate() {
            match ids.iter().position(|&x| x == b) {
                Some(i) => blocks[i].push(s),
                None => {
                    ids.push(b);
                    blocks.push(vec![s]);
                }
            }
        }
        Partition { blocks }
    }

    pub fn render(&self, names: &[String]) -> String {
        self.blocks
            .iter()
            .map(|b| format!("{{{}}}", b.iter().map(|&s| names[s].as_str()).collect::<Vec<_>>().join(",")))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Mass of `d` on each block of `assign`.
pub fn block_projection(d: &Dist, assign: &[usize], n_blocks: usize) -> Vector {
    let mut v = vec![Rational::default(); n_blocks];
    for (s, p) in d.iter() {
        v[assign[s]] += p;
    }
    v
}

/// Whether every raw a-transition of `s` is matched by a combined a-transition of `t`
/// with equal block masses.
pub fn matched_by(a: &Automaton, assign: &[usize], n_blocks: usize, s: StateId, t: StateId, x: ActionId) -> Result<bool> {
    let gens: Vec<Vector> = a.choices(t, x).map(|c| block_projection(c, assign, n_blocks)).collect();
    for c in a.choices(s, x) {
        if gens.is_empty() {
            return Ok(false);
        }
        if hull_member(&block_projection(c, assign, n_blocks), &gens)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn equivalent_under(a: &Automaton, assign: &[usize], n_blocks: usize, s: StateId, t: StateId) -> Result<bool> {
    for x in 0..a.num_actions() {
        if !matched_by(a, assign, n_blocks, s, t, x)? || !matched_by(a, assign, n_blocks, t, s, x)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Coarsest probabilistic bisimulation over states, by signature refinement to a fixpoint.
pub fn prob_bisim(a: &Automaton) -> Result<Partition> {
    let n = a.num_states();
    let classes = a.label_classes();
    let mut assign: Vec<usize> = (0..n).map(|s| classes.iter().position(|l| l == a.label(s)).unwrap()).collect();
    let mut n_blocks = classes.len();
    loop {
        let mut next = vec![usize::MAX; n];
        let mut reps: Vec<StateId> = Vec::new();
        for s in 0..n {
            let mut found = None;
            for (i, &r) in reps.iter().enumerate() {
                if assign[r] == assign[s] && equivalent_under(a, &assign, n_blocks, s, r)? {
                    found = Some(i);
                    break;
                }
            }
            next[s] = match found {
                Some(i) => i,
                None => {
                    reps.push(s);
                    reps.len() - 1
                }
            };
        }
        if reps.len() == n_blocks {
            return Ok(Partition::from_assignment(&next));
        }
        assign = next;
        n_blocks = reps.len();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{direct_sum, parse_model};

    #[test]
    fn twins_share_blocks() {
        let a = parse_model(
            "automaton m\nap p\nactions a b\nstate x label p\nstate y\nstate z\ninit x:1\n\
             trans x a -> y:1/2,z:1/2\ntrans x a -> x:1\ntrans y b -> x:1\ntrans z b -> z:1\n",
        )
        .unwrap();
        let sum = direct_sum(&a, &a).unwrap();
        let p = prob_bisim(&sum.automaton).unwrap();
        for s in 0..a.num_states() {
            assert!(p.same_block(sum.left[s], sum.right[s]));
        }
    }

    #[test]
    fn combined_transitions_match() {
        // y's middle choice is a convex combination of its others
        let a = parse_model(
            "automaton m\nap p\nactions a\nstate x\nstate y\nstate g label p\nstate h\ninit x:1\n\
             trans x a -> g:1\ntrans x a -> h:1\n\
             trans y a -> g:1\ntrans y a -> g:1/2,h:1/2\ntrans y a -> h:1\n",
        )
        .unwrap();
        let p = prob_bisim(&a).unwrap();
        assert!(p.same_block(0, 1));
        assert!(!p.same_block(2, 3));
    }
}
