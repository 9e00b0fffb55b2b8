use std::collections::BTreeSet;

use num_traits::{One, Zero};
use proptest::prelude::*;

use pabisim::automata::{label_mass, parse_model, serialize_model, Dist};
use pabisim::bisimulation::{dist_bisim_refute, RefuteOutcome, Semantics};
use pabisim::generators::{gen_random, random_distribution, RandomParams};
use pabisim::logic::{eval, parse_formula, Formula};
use pabisim::metrics::{d_ap, df_det};
use pabisim::numerics::{ratio, transport_cost, Matrix, Rational};
use pabisim::traces::max_word_prob;

fn formula() -> impl Strategy<Value = Formula> {
    let prop_set = prop::collection::btree_set(prop::sample::select(vec!["p", "q", "r"]), 0..3)
        .prop_map(|s| s.into_iter().map(String::from).collect::<BTreeSet<String>>());
    let leaf = prop::collection::vec(prop_set, 1..3).prop_map(Formula::ClassFamily);
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::neg),
            (prop::sample::select(vec!["a", "b", "go"]), inner.clone()).prop_map(|(x, f)| Formula::diamond(x, f)),
            (inner.clone(), 0i64..=4, 1i64..=4)
                .prop_filter("amount in [0,1]", |(_, n, d)| n <= d)
                .prop_map(|(f, n, d)| Formula::Shift(Box::new(f), ratio(n, d))),
            prop::collection::vec(inner, 2..4).prop_map(Formula::Conj),
        ]
    })
}

fn params(deterministic: bool) -> RandomParams {
    RandomParams { n_states: 4, deterministic, max_support: 3, ..Default::default() }
}

fn cost_matrix(n: usize, entries: &[u8]) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| ratio((entries[i * n + j] % 5) as i64, 4)).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn formulas_print_and_parse_back(f in formula()) {
        let text = f.to_string();
        prop_assert_eq!(parse_formula(&text).unwrap(), f, "{}", text);
    }

    #[test]
    fn random_models_round_trip(seed in any::<u64>(), det in any::<bool>()) {
        let a = gen_random(&params(det), seed).unwrap();
        prop_assert_eq!(parse_model(&serialize_model(&a)).unwrap(), a);
    }

    #[test]
    fn optimal_coupling_is_feasible_and_beats_the_product(s1 in any::<u64>(), s2 in any::<u64>(), c in prop::collection::vec(any::<u8>(), 16)) {
        let n = 4;
        let mu = random_distribution(n, 3, s1).to_dense(n);
        let nu = random_distribution(n, 3, s2).to_dense(n);
        let cost = cost_matrix(n, &c);
        let (v, coupling) = transport_cost(&mu, &nu, &cost).unwrap();
        let w = &coupling.weights;
        let mut total = Rational::zero();
        for i in 0..n {
            prop_assert_eq!(w[i].iter().sum::<Rational>(), mu[i].clone());
            prop_assert_eq!((0..n).map(|k| w[k][i].clone()).sum::<Rational>(), nu[i].clone());
            for j in 0..n {
                prop_assert!(w[i][j] >= Rational::zero());
                total += &w[i][j] * &cost[i][j];
            }
        }
        prop_assert_eq!(&total, &v);
        let product: Rational = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| &mu[i] * &nu[j] * &cost[i][j]).sum();
        prop_assert!(v <= product);
    }

    #[test]
    fn label_distance_is_a_bounded_lower_bound(seed in 0u64..10_000, s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = gen_random(&params(true), seed).unwrap();
        let (mu, nu) = (random_distribution(4, 3, s1), random_distribution(4, 3, s2));
        let d = d_ap(&a, &mu, &nu);
        prop_assert!(d >= Rational::zero() && d <= Rational::one());
        prop_assert_eq!(&d, &d_ap(&a, &nu, &mu));
        let df = df_det(&a, &mu, &nu, &ratio(1, 2), &ratio(1, 100)).unwrap();
        prop_assert!(df.value >= d, "D_f {} below d_AP {}", df.value, d);
        prop_assert!(df.value <= df.upper);
    }

    #[test]
    fn class_formulas_measure_label_mass(seed in 0u64..10_000, s in any::<u64>()) {
        let a = gen_random(&params(false), seed).unwrap();
        let mu = random_distribution(4, 3, s);
        let half = ratio(1, 2);
        for class in a.label_classes() {
            let props = a.label_names(&class);
            let phi = Formula::class(&props);
            let v = eval(&a, &phi, &mu, &half).unwrap();
            prop_assert_eq!(&v, &label_mass(&a, &mu, &class));
            prop_assert_eq!(eval(&a, &Formula::neg(phi), &mu, &half).unwrap(), Rational::one() - v);
        }
    }

    #[test]
    fn word_probability_shrinks_along_extensions(seed in 0u64..10_000, word in prop::collection::vec(0usize..2, 0..5), x in 0usize..2) {
        let a = gen_random(&params(false), seed).unwrap();
        let mu = a.initial().clone();
        let p = max_word_prob(&a, &mu, &word).unwrap();
        let mut longer = word.clone();
        longer.push(x);
        prop_assert!(max_word_prob(&a, &mu, &longer).unwrap() <= p);
        prop_assert!(p <= Rational::one());
    }

    #[test]
    fn refutation_is_monotone_in_depth(seed in 0u64..10_000, s in 0usize..4, t in 0usize..4, k in 0usize..3) {
        let a = gen_random(&RandomParams { n_states: 4, max_support: 2, ..Default::default() }, seed).unwrap();
        let (mu, nu) = (Dist::dirac(s), Dist::dirac(t));
        let shallow = dist_bisim_refute(&a, &mu, &nu, Semantics::Plain, k, None).unwrap().0;
        let deep = dist_bisim_refute(&a, &mu, &nu, Semantics::Plain, k + 1, None).unwrap().0;
        if let RefuteOutcome::Refuted(c) = &shallow {
            prop_assert!(c.depth() <= k);
            prop_assert!(matches!(deep, RefuteOutcome::Refuted(_)));
        }
        if s == t {
            prop_assert_eq!(deep, RefuteOutcome::NoViolationUpTo(k + 1));
        }
    }
}
