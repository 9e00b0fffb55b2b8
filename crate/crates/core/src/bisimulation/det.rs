use crate::automata::{classify, ensure_extended, ActionId, Automaton, Dist, Label};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rational, Subspace, Vector};
use crate::reactive::forward_closure;

/// Verdict of the exact decision on automata whose extension is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetVerdict {
    pub bisimilar: bool,
    /// the step word after which label-class masses first differ
    pub witness: Option<Vec<ActionId>>,
    /// the class whose masses differ, over the extended automaton's propositions
    pub class: Option<Label>,
    pub basis: Subspace,
}

/// Per-action step matrices and label-class indicators of a deterministic extended automaton.
pub(crate) fn deterministic_maps(a: &Automaton) -> Result<(Automaton, Vec<Matrix>, Vec<Label>, Vec<Vector>)> {
    let ext = ensure_extended(a)?.automaton;
    if !classify(&ext).deterministic {
        return Err(Error::Nondeterministic(format!(
            "`{}` has a state with several transitions for one action; use refutation or a certificate",
            a.name()
        )));
    }
    let n = ext.num_states();
    let maps = (0..ext.num_actions())
        .map(|x| (0..n).map(|s| ext.choice(s, x, 0).to_dense(n)).collect())
        .collect();
    let classes = ext.label_classes();
    let indicators = classes
        .iter()
        .map(|l| (0..n).map(|s| if ext.label(s) == l { Rational::from_integer(1.into()) } else { Rational::default() }).collect())
        .collect();
    Ok((ext, maps, classes, indicators))
}

pub fn dist_bisim_det(a: &Automaton, mu: &Dist, nu: &Dist) -> Result<DetVerdict> {
    let (ext, maps, classes, indicators) = deterministic_maps(a)?;
    let n = ext.num_states();
    let start: Vector = mu.to_dense(n).into_iter().zip(nu.to_dense(n)).map(|(x, y)| x - y).collect();
    let (v, hit) = forward_closure(start, &maps, &indicators)?;
    Ok(DetVerdict { bisimilar: v.equivalent, witness: v.witness, class: hit.map(|i| classes[i].clone()), basis: v.basis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::parse_model;

    #[test]
    fn identical_pair_needs_no_work() {
        let a = parse_model("automaton m\nap p\nactions a\nstate x label p\nstate y\ninit x:1\ntrans x a -> y:1\n").unwrap();
        let v = dist_bisim_det(&a, &Dist::dirac(0), &Dist::dirac(0)).unwrap();
        assert!(v.bisimilar);
        assert_eq!(v.basis.rank(), 0);
    }

    #[test]
    fn witness_word() {
        let a = parse_model(
            "automaton m\nap p\nactions a\nstate x\nstate y\nstate g label p\ninit x:1\n\
             trans x a -> y:1\ntrans y a -> g:1\ntrans g a -> g:1\n",
        )
        .unwrap();
        let v = dist_bisim_det(&a, &Dist::dirac(0), &Dist::dirac(1)).unwrap();
        assert!(!v.bisimilar);
        assert_eq!(v.witness, Some(vec![0]));
    }

    #[test]
    fn nondeterminism_rejected() {
        let a = parse_model("automaton m\nap\nactions a\nstate x\ninit x:1\ntrans x a -> x:1\ntrans x a -> x:1\n").unwrap();
        assert!(matches!(dist_bisim_det(&a, &Dist::dirac(0), &Dist::dirac(0)), Err(Error::Nondeterministic(_))));
    }
}
