//! Distribution and state metrics: label distance, the fixed-point distribution metric (exact on
//! deterministic automata, bracketed otherwise), the Kantorovich state metric, and their
//! comparison.

use std::collections::{HashMap, HashSet};

use num_traits::{One, Zero};

use crate::automata::{classify, ensure_extended, ActionId, Automaton, Dist};
use crate::bisimulation::dist_bisim_det;
use crate::error::{max_nodes, Error, Result};
use crate::lifting::dist_step_vertices;
use crate::logic::{distance_lb, Formula};
use crate::numerics::{abs, pow, transport_cost, Matrix, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricStatus {
    ExactFixpoint,
    WithinTol,
    IterationCapped,
}

impl MetricStatus {
    pub fn name(self) -> &'static str {
        match self {
            MetricStatus::ExactFixpoint => "exact-fixpoint",
            MetricStatus::WithinTol => "within-tol",
            MetricStatus::IterationCapped => "iteration-capped",
        }
    }
}

fn check_gamma(gamma: &Rational) -> Result<()> {
    if *gamma <= Rational::zero() || *gamma > Rational::one() {
        return Err(Error::Rejected(format!("discount {gamma} is outside (0,1]")));
    }
    Ok(())
}

fn check_tol(tol: &Rational) -> Result<()> {
    if *tol <= Rational::zero() {
        return Err(Error::Rejected(format!("tolerance {tol} must be positive")));
    }
    Ok(())
}

/// Half the L1 gap between the label-class masses of μ and ν. Only inhabited classes are visited.
pub fn d_ap(a: &Automaton, mu: &Dist, nu: &Dist) -> Rational {
    let mut gap: HashMap<&crate::automata::Label, Rational> = HashMap::new();
    for (s, p) in mu.iter() {
        *gap.entry(a.label(s)).or_default() += p;
    }
    for (s, p) in nu.iter() {
        *gap.entry(a.label(s)).or_default() -= p;
    }
    gap.values().map(abs).sum::<Rational>() / Rational::from_integer(2.into())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DfResult {
    /// the supremum over explored step sequences; exact or a lower bound depending on `status`
    pub value: Rational,
    pub status: MetricStatus,
    /// sound upper bound on the true value
    pub upper: Rational,
    /// action word reaching the maximising pair
    pub witness: Vec<ActionId>,
    pub pairs_explored: usize,
}

fn deterministic_ext(a: &Automaton) -> Result<Automaton> {
    let ext = ensure_extended(a)?.automaton;
    if !classify(&ext).deterministic {
        return Err(Error::Nondeterministic(format!(
            "`{}` has a state with several transitions for one action; use the bracketing bounds instead",
            a.name()
        )));
    }
    Ok(ext)
}

fn det_step(g: &Automaton, d: &Dist, x: ActionId) -> Dist {
    let mut out = Dist::empty();
    for (s, p) in d.iter() {
        out.add_scaled(p, g.choice(s, x, 0));
    }
    out
}

/// Breadth-first search over reachable (μ_w, ν_w) pairs. A revisited pair adds nothing, since
/// it was first met at a depth with a larger discount factor.
fn df_search(g: &Automaton, mu: &Dist, nu: &Dist, gamma: &Rational, tol: &Rational, depth_cap: Option<usize>) -> DfResult {
    let cap = max_nodes();
    let mut best = Rational::zero();
    let mut witness = Vec::new();
    let mut seen: HashSet<(Dist, Dist)> = HashSet::new();
    let mut level: Vec<(Dist, Dist, Vec<ActionId>)> = vec![(mu.clone(), nu.clone(), Vec::new())];
    seen.insert((mu.clone(), nu.clone()));
    let mut factor = Rational::one();
    let mut depth = 0usize;
    loop {
        let mut next = Vec::new();
        let child_factor = &factor * gamma;
        for (m, n, w) in &level {
            let v = &factor * d_ap(g, m, n);
            if v > best {
                best = v;
                witness = w.clone();
            }
        }
        for (m, n, w) in level {
            if m == n || child_factor <= best {
                continue;
            }
            for x in 0..g.num_actions() {
                let (m2, n2) = (det_step(g, &m, x), det_step(g, &n, x));
                if seen.insert((m2.clone(), n2.clone())) {
                    let mut w2 = w.clone();
                    w2.push(x);
                    next.push((m2, n2, w2));
                }
            }
        }
        let pairs_explored = seen.len();
        if next.is_empty() {
            return DfResult { upper: best.clone(), value: best, status: MetricStatus::ExactFixpoint, witness, pairs_explored };
        }
        // every unexplored pair is worth at most child_factor
        let upper = if child_factor > best { child_factor.clone() } else { best.clone() };
        let capped = depth_cap.is_some_and(|k| depth >= k) || pairs_explored > cap;
        if child_factor <= *tol || capped {
            let status = if child_factor <= *tol { MetricStatus::WithinTol } else { MetricStatus::IterationCapped };
            return DfResult { value: best, status, upper, witness, pairs_explored };
        }
        level = next;
        factor = child_factor;
        depth += 1;
    }
}

/// The fixed-point distribution metric on an automaton whose input-enabled extension is
/// deterministic.
pub fn df_det(a: &Automaton, mu: &Dist, nu: &Dist, gamma: &Rational, tol: &Rational) -> Result<DfResult> {
    check_gamma(gamma)?;
    check_tol(tol)?;
    let g = deterministic_ext(a)?;
    if mu == nu || dist_bisim_det(a, mu, nu)?.bisimilar {
        return Ok(DfResult {
            value: Rational::zero(),
            status: MetricStatus::ExactFixpoint,
            upper: Rational::zero(),
            witness: Vec::new(),
            pairs_explored: 1,
        });
    }
    Ok(df_search(&g, mu, nu, gamma, tol, None))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bound {
    pub lower: Rational,
    pub upper: Rational,
    pub lower_witness: Formula,
    /// attacker actions along the line realising the upper value
    pub upper_witness: Vec<String>,
    /// set when the upper value comes from vertex-restricted play on a nondeterministic automaton
    pub heuristic_upper: bool,
}

type GameMemo = HashMap<(Dist, Dist, usize), (Rational, Vec<ActionId>)>;

/// Depth-truncated sup/inf play over polytope vertices. Budget 0 bounds the future by γ.
fn vertex_game(g: &Automaton, mu: &Dist, nu: &Dist, gamma: &Rational, k: usize, memo: &mut GameMemo) -> Result<(Rational, Vec<ActionId>)> {
    if mu == nu {
        return Ok((Rational::zero(), Vec::new()));
    }
    let key = (mu.clone(), nu.clone(), k);
    if let Some(v) = memo.get(&key) {
        return Ok(v.clone());
    }
    let cap = max_nodes();
    if memo.len() > cap {
        return Err(Error::CapExceeded { what: "metric game".into(), limit: cap });
    }
    let mut best = (d_ap(g, mu, nu), Vec::new());
    if k == 0 {
        if *gamma > best.0 {
            best.0 = gamma.clone();
        }
    } else {
        for x in 0..g.num_actions() {
            let vm = dist_step_vertices(g, mu, x)?.vertices;
            let vn = dist_step_vertices(g, nu, x)?.vertices;
            for (att, def, flip) in [(&vm, &vn, false), (&vn, &vm, true)] {
                for v in att {
                    let mut worst: Option<(Rational, Vec<ActionId>)> = None;
                    for w in def {
                        let (l, r) = if flip { (w, v) } else { (v, w) };
                        let (val, line) = vertex_game(g, l, r, gamma, k - 1, memo)?;
                        let val = gamma * val;
                        if worst.as_ref().is_none_or(|(b, _)| val < *b) {
                            worst = Some((val, line));
                        }
                    }
                    if let Some((val, line)) = worst {
                        if val > best.0 {
                            let mut w = vec![x];
                            w.extend(line);
                            best = (val, w);
                        }
                    }
                }
            }
        }
    }
    memo.insert(key, best.clone());
    Ok(best)
}

/// Lower and upper bounds on the distribution metric from depth-limited exploration.
pub fn df_bounds(a: &Automaton, mu: &Dist, nu: &Dist, gamma: &Rational, depth: usize) -> Result<Bound> {
    check_gamma(gamma)?;
    let (lower, lower_witness) = distance_lb(a, mu, nu, gamma, depth)?;
    if mu == nu {
        return Ok(Bound { lower, upper: Rational::zero(), lower_witness, upper_witness: Vec::new(), heuristic_upper: false });
    }
    let g = ensure_extended(a)?.automaton;
    let names = |w: Vec<ActionId>| w.into_iter().map(|x| g.actions()[x].clone()).collect::<Vec<_>>();
    let (upper, word, heuristic_upper) = if classify(&g).deterministic {
        let r = df_search(&g, mu, nu, gamma, &Rational::zero(), Some(depth));
        (r.upper, r.witness, false)
    } else {
        let (v, w) = vertex_game(&g, mu, nu, gamma, depth, &mut HashMap::new())?;
        (v, w, true)
    };
    let upper = if upper < lower { lower.clone() } else { upper };
    Ok(Bound { lower, upper, lower_witness, upper_witness: names(word), heuristic_upper })
}

/// Symmetric state-pair metric with its iteration record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricTable {
    pub states: Vec<String>,
    pub values: Matrix,
    pub iterations: usize,
    pub status: MetricStatus,
}

impl MetricTable {
    pub fn get(&self, s: usize, t: usize) -> &Rational {
        &self.values[s][t]
    }
}

fn kantorovich(d: &Matrix, mu: &Dist, nu: &Dist) -> Result<Rational> {
    let n = d.len();
    Ok(transport_cost(&mu.to_dense(n), &nu.to_dense(n), d)?.0)
}

/// sup over s's a-choices of inf over t's a-choices, with inf ∅ = 1 and sup ∅ = 0.
fn one_sided(a: &Automaton, d: &Matrix, s: usize, t: usize, x: ActionId, gamma: &Rational) -> Result<Rational> {
    let mut sup = Rational::zero();
    for m in a.choices(s, x) {
        let mut inf = Rational::one();
        let mut first = true;
        for n in a.choices(t, x) {
            let v = gamma * kantorovich(d, m, n)?;
            if first || v < inf {
                inf = v;
                first = false;
            }
        }
        if inf > sup {
            sup = inf;
        }
    }
    Ok(sup)
}

fn state_step(a: &Automaton, d: &Matrix, gamma: &Rational) -> Result<Matrix> {
    let n = a.num_states();
    let mut out = vec![vec![Rational::zero(); n]; n];
    for s in 0..n {
        for t in s + 1..n {
            let v = if a.label(s) != a.label(t) {
                Rational::one()
            } else {
                let mut v = Rational::zero();
                for x in 0..a.num_actions() {
                    for w in [one_sided(a, d, s, t, x, gamma)?, one_sided(a, d, t, s, x, gamma)?] {
                        if w > v {
                            v = w;
                        }
                    }
                }
                v
            };
            out[s][t] = v.clone();
            out[t][s] = v;
        }
    }
    Ok(out)
}

/// Kleene iteration of the state functional from the zero metric on the raw automaton.
pub fn state_metric_df(a: &Automaton, gamma: &Rational, tol: &Rational, max_iter: usize) -> Result<MetricTable> {
    check_gamma(gamma)?;
    check_tol(tol)?;
    let n = a.num_states();
    let mut d = vec![vec![Rational::zero(); n]; n];
    let mut iterations = 0;
    let status = loop {
        if iterations >= max_iter {
            break MetricStatus::IterationCapped;
        }
        let next = state_step(a, &d, gamma)?;
        iterations += 1;
        if next == d {
            break MetricStatus::ExactFixpoint;
        }
        d = next;
        // the distance to the fixpoint is at most γ^iterations
        if *gamma < Rational::one() && pow(gamma, iterations) <= *tol {
            break MetricStatus::WithinTol;
        }
    };
    Ok(MetricTable { states: a.state_names().to_vec(), values: d, iterations, status })
}

pub fn lift_metric(table: &MetricTable, mu: &Dist, nu: &Dist) -> Result<Rational> {
    kantorovich(&table.values, mu, nu)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricComparison {
    pub mu: Dist,
    pub nu: Dist,
    /// exact value on deterministic automata, otherwise a lower bound
    pub df: Rational,
    pub df_exact: bool,
    pub lifted: Rational,
    /// allowance for a truncated state metric; zero at an exact fixpoint
    pub slack: Rational,
    pub holds: bool,
}

/// Search depth for the distribution-metric lower bound on nondeterministic automata.
pub const COMPARE_DEPTH: usize = 4;
const COMPARE_MAX_ITER: usize = 200;

/// Checks the distribution metric against the lifted state metric for each pair.
pub fn compare_metrics(a: &Automaton, pairs: &[(Dist, Dist)], gamma: &Rational, tol: &Rational) -> Result<Vec<MetricComparison>> {
    let table = state_metric_df(a, gamma, tol, COMPARE_MAX_ITER)?;
    let slack = match table.status {
        MetricStatus::ExactFixpoint => Rational::zero(),
        _ if *gamma < Rational::one() => pow(gamma, table.iterations),
        _ => Rational::one(),
    };
    let deterministic = classify(&ensure_extended(a)?.automaton).deterministic;
    pairs
        .iter()
        .map(|(mu, nu)| {
            let (df, df_exact) = if deterministic {
                let r = df_det(a, mu, nu, gamma, tol)?;
                (r.value, r.status == MetricStatus::ExactFixpoint)
            } else {
                (distance_lb(a, mu, nu, gamma, COMPARE_DEPTH)?.0, false)
            };
            let lifted = lift_metric(&table, mu, nu)?;
            let holds = df <= &lifted + &slack;
            Ok(MetricComparison { mu: mu.clone(), nu: nu.clone(), df, df_exact, lifted, slack: slack.clone(), holds })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ApproxAnswer {
    Yes,
    No,
    Unknown { lower: Rational, upper: Rational },
}

/// Largest depth used when bracketing on nondeterministic automata.
pub const APPROX_MAX_DEPTH: usize = 6;

/// Decides μ ∼ε ν where the metric brackets allow it.
pub fn approx_bisim_query(a: &Automaton, mu: &Dist, nu: &Dist, eps: &Rational, gamma: &Rational, tol: &Rational) -> Result<ApproxAnswer> {
    check_gamma(gamma)?;
    check_tol(tol)?;
    if *eps >= Rational::one() {
        return Ok(ApproxAnswer::Yes);
    }
    let (lower, upper, sound_upper) = if classify(&ensure_extended(a)?.automaton).deterministic {
        let r = df_det(a, mu, nu, gamma, tol)?;
        (r.value, r.upper, true)
    } else {
        let mut depth = 0;
        while depth < APPROX_MAX_DEPTH && pow(gamma, depth + 1) > *tol {
            depth += 1;
        }
        let b = df_bounds(a, mu, nu, gamma, depth)?;
        (b.lower, b.upper, !b.heuristic_upper)
    };
    Ok(if lower > *eps {
        ApproxAnswer::No
    } else if sound_upper && upper <= *eps {
        ApproxAnswer::Yes
    } else {
        ApproxAnswer::Unknown { lower, upper }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{exam1, fixture};
    use crate::numerics::ratio;

    fn exam() -> (Automaton, Dist, Dist) {
        let a = exam1(&ratio(1, 5), &ratio(1, 10)).unwrap();
        let q = a.parse_dist("q:1").unwrap();
        let q2 = a.parse_dist("q':1").unwrap();
        (a, q, q2)
    }

    #[test]
    fn label_distance() {
        let (a, q, q2) = exam();
        assert_eq!(d_ap(&a, &q, &q), Rational::zero());
        let s2 = a.parse_dist("s2:1").unwrap();
        assert_eq!(d_ap(&a, &q, &s2), Rational::one());
        // two-step successors: {a}-mass 1/2(1+ε1−ε2) against 1/2
        let mu = a.parse_dist("s1:13/30,s2:2/15,s3:7/60,s4:19/60").unwrap();
        let nu = a.parse_dist("s1':1/2,s2':1/2").unwrap();
        assert_eq!(d_ap(&a, &mu, &nu), ratio(1, 20));
        let _ = q2;
    }

    #[test]
    fn exam1_distribution_metric() {
        let (a, q, q2) = exam();
        let r = df_det(&a, &q, &q2, &Rational::one(), &ratio(1, 1000)).unwrap();
        assert_eq!((r.value.clone(), r.status), (ratio(1, 20), MetricStatus::ExactFixpoint));
        assert_eq!(r.upper, r.value);
        assert_eq!(r.witness.len(), 2);
        let r = df_det(&a, &q, &q2, &ratio(1, 2), &ratio(1, 1000)).unwrap();
        assert_eq!(r.value, ratio(1, 80));
        assert_eq!(df_det(&a, &q, &q, &ratio(1, 2), &ratio(1, 1000)).unwrap().value, Rational::zero());
    }

    #[test]
    fn exam1_bounds_meet() {
        let (a, q, q2) = exam();
        for (gamma, want) in [(Rational::one(), ratio(1, 20)), (ratio(1, 2), ratio(1, 80))] {
            let b = df_bounds(&a, &q, &q2, &gamma, 4).unwrap();
            assert_eq!((b.lower.clone(), b.upper.clone()), (want.clone(), want));
            assert!(!b.heuristic_upper);
        }
        let b = df_bounds(&a, &q, &q, &ratio(1, 2), 3).unwrap();
        assert_eq!((b.lower, b.upper), (Rational::zero(), Rational::zero()));
    }

    #[test]
    fn exam1_state_metric() {
        let (a, q, q2) = exam();
        let t = state_metric_df(&a, &Rational::one(), &ratio(1, 1000), 100).unwrap();
        assert_eq!(t.status, MetricStatus::ExactFixpoint);
        let id = |n: &str| a.state_id(n).unwrap();
        assert_eq!(*t.get(id("r1"), id("r'")), ratio(11, 30));
        assert_eq!(*t.get(id("r2"), id("r'")), ratio(4, 15));
        assert_eq!(lift_metric(&t, &q, &q2).unwrap(), ratio(19, 60));
        assert_eq!(lift_metric(&t, &q, &q).unwrap(), Rational::zero());
        for s in 0..a.num_states() {
            assert!(t.get(s, s).is_zero());
        }
        let report = compare_metrics(&a, &[(q.clone(), q2.clone()), (q.clone(), q.clone())], &Rational::one(), &ratio(1, 1000)).unwrap();
        assert_eq!((report[0].df.clone(), report[0].lifted.clone()), (ratio(1, 20), ratio(19, 60)));
        assert!(report.iter().all(|r| r.holds));
        assert_eq!((report[1].df.clone(), report[1].lifted.clone()), (Rational::zero(), Rational::zero()));
    }

    #[test]
    fn approx_queries() {
        let (a, q, q2) = exam();
        let tol = ratio(1, 1000);
        let one = Rational::one();
        assert_eq!(approx_bisim_query(&a, &q, &q2, &ratio(1, 30), &one, &tol).unwrap(), ApproxAnswer::No);
        assert_eq!(approx_bisim_query(&a, &q, &q2, &ratio(1, 10), &one, &tol).unwrap(), ApproxAnswer::Yes);
        assert_eq!(approx_bisim_query(&a, &q, &q2, &one, &one, &tol).unwrap(), ApproxAnswer::Yes);
    }

    #[test]
    fn nondeterministic_bracket() {
        let f = fixture("sim-coarser").unwrap();
        assert!(matches!(df_det(&f.automaton, &f.mu, &f.nu, &ratio(1, 2), &ratio(1, 100)), Err(Error::Nondeterministic(_))));
        let b = df_bounds(&f.automaton, &f.mu, &f.nu, &ratio(1, 2), 6).unwrap();
        assert_eq!(b.lower, Rational::zero());
        assert!(b.heuristic_upper && b.upper >= b.lower);
        let b = df_bounds(&f.automaton, &f.mu, &f.mu, &ratio(1, 2), 6).unwrap();
        assert_eq!((b.lower, b.upper), (Rational::zero(), Rational::zero()));
    }
}
