use num_traits::Zero;

use super::{lp_solve, Constraint, LinearProgram, LpOutcome, Matrix, NumericsError, Rational, Relation, Sense};

/// Joint weights with prescribed marginals, indexed `[row state][column state]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coupling {
    pub weights: Matrix,
}

impl Coupling {
    pub fn cost(&self, cost: &Matrix) -> Rational {
        let mut total = Rational::zero();
        for (wr, cr) in self.weights.iter().zip(cost) {
            for (w, c) in wr.iter().zip(cr) {
                if !w.is_zero() {
                    total += w * c;
                }
            }
        }
        total
    }
}

/// Minimum-cost coupling of two dense distributions.
pub fn transport_cost(mu: &[Rational], nu: &[Rational], cost: &Matrix) -> Result<(Rational, Coupling), NumericsError> {
    let n = mu.len();
    if nu.len() != n || cost.len() != n || cost.iter().any(|r| r.len() != n) {
        return Err(NumericsError::Dimension(format!(
            "marginals of length {} and {} with a {}-row cost matrix",
            n,
            nu.len(),
            cost.len()
        )));
    }
    let rows: Vec<usize> = (0..n).filter(|&i| !mu[i].is_zero()).collect();
    let cols: Vec<usize> = (0..n).filter(|&j| !nu[j].is_zero()).collect();
    let mut weights = vec![vec![Rational::zero(); n]; n];
    if rows.len() == 1 || cols.len() == 1 {
        // the coupling is forced
        for &i in &rows {
            for &j in &cols {
                weights[i][j] = &mu[i] * &nu[j];
            }
        }
        let c = Coupling { weights };
        return Ok((c.cost(cost), c));
    }
    let nv = rows.len() * cols.len();
    let var = |a: usize, b: usize| a * cols.len() + b;
    let mut constraints = Vec::with_capacity(rows.len() + cols.len());
    for (a, &i) in rows.iter().enumerate() {
        let mut coeffs = vec![Rational::zero(); nv];
        for b in 0..cols.len() {
            coeffs[var(a, b)] = Rational::from_integer(1.into());
        }
        constraints.push(Constraint::new(coeffs, Relation::Eq, mu[i].clone()));
    }
    for (b, &j) in cols.iter().enumerate() {
        let mut coeffs = vec![Rational::zero(); nv];
        for a in 0..rows.len() {
            coeffs[var(a, b)] = Rational::from_integer(1.into());
        }
        constraints.push(Constraint::new(coeffs, Relation::Eq, nu[j].clone()));
    }
    let mut objective = vec![Rational::zero(); nv];
    for (a, &i) in rows.iter().enumerate() {
        for (b, &j) in cols.iter().enumerate() {
            objective[var(a, b)] = cost[i][j].clone();
        }
    }
    let lp = LinearProgram { num_vars: nv, objective, sense: Sense::Minimize, constraints };
    match lp_solve(&lp)? {
        LpOutcome::Optimal { value, point } => {
            for (a, &i) in rows.iter().enumerate() {
                for (b, &j) in cols.iter().enumerate() {
                    weights[i][j] = point[var(a, b)].clone();
                }
            }
            Ok((value, Coupling { weights }))
        }
        _ => Err(NumericsError::Dimension("marginals do not carry equal mass".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, ratio};

    fn discrete(n: usize) -> Matrix {
        (0..n).map(|i| (0..n).map(|j| if i == j { int(0) } else { int(1) }).collect()).collect()
    }

    #[test]
    fn identical_marginals_cost_nothing() {
        let mu = vec![ratio(1, 3), ratio(1, 6), ratio(1, 2)];
        let (v, c) = transport_cost(&mu, &mu, &discrete(3)).unwrap();
        assert_eq!(v, int(0));
        for i in 0..3 {
            assert_eq!(c.weights[i][i], mu[i]);
        }
    }

    #[test]
    fn two_point_discrete() {
        let (v, _) = transport_cost(&[ratio(1, 2), ratio(1, 2)], &[int(1), int(0)], &discrete(2)).unwrap();
        assert_eq!(v, ratio(1, 2));
    }

    #[test]
    fn marginals_are_exact() {
        let mu = vec![ratio(1, 4), ratio(1, 4), ratio(1, 2)];
        let nu = vec![ratio(1, 2), ratio(1, 3), ratio(1, 6)];
        let cost = vec![
            vec![int(0), ratio(1, 2), int(1)],
            vec![ratio(1, 2), int(0), ratio(1, 3)],
            vec![int(1), ratio(1, 3), int(0)],
        ];
        let (v, c) = transport_cost(&mu, &nu, &cost).unwrap();
        for i in 0..3 {
            let row: Rational = c.weights[i].iter().sum();
            let col: Rational = c.weights.iter().map(|r| r[i].clone()).sum();
            assert_eq!(row, mu[i]);
            assert_eq!(col, nu[i]);
        }
        assert_eq!(v, c.cost(&cost));
    }

    #[test]
    fn mismatched_dimensions() {
        assert!(transport_cost(&[int(1)], &[int(1), int(0)], &discrete(2)).is_err());
    }
}
