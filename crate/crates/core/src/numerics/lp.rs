use num_traits::{One, Signed, Zero};

use super::{NumericsError, Rational, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vector,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vector, relation: Relation, rhs: Rational) -> Self {
        Constraint { coeffs, relation, rhs }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// A linear program over non-negative variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vector,
    pub sense: Sense,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rational, point: Vector },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn point(&self) -> Option<&Vector> {
        match self {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }
}

struct Tableau {
    a: Vec<Vec<Rational>>,
    b: Vec<Rational>,
    basis: Vec<usize>,
    artificial: Vec<bool>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c].clone();
        if !p.is_one() {
            for x in self.a[r].iter_mut() {
                if !x.is_zero() {
                    *x /= &p;
                }
            }
            self.b[r] /= &p;
        }
        let prow = self.a[r].clone();
        let pb = self.b[r].clone();
        for i in 0..self.a.len() {
            if i == r || self.a[i][c].is_zero() {
                continue;
            }
            let f = self.a[i][c].clone();
            for (x, y) in self.a[i].iter_mut().zip(&prow) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
            if !pb.is_zero() {
                self.b[i] -= &f * &pb;
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost` over the current basis with Bland's rule. Returns false when unbounded.
    fn minimize(&mut self, cost: &[Rational], allowed: impl Fn(usize) -> bool) -> bool {
        let ncols = cost.len();
        loop {
            let mut entering = None;
            for j in 0..ncols {
                if !allowed(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j].clone();
                for (i, &bi) in self.basis.iter().enumerate() {
                    if !cost[bi].is_zero() && !self.a[i][j].is_zero() {
                        d -= &cost[bi] * &self.a[i][j];
                    }
                }
                if d.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else { return true };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.a.len() {
                if !self.a[i][j].is_positive() {
                    continue;
                }
                let ratio = &self.b[i] / &self.a[i][j];
                let better = match &leave {
                    None => true,
                    Some((k, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else { return false };
            self.pivot(r, j);
        }
    }

    fn value(&self, cost: &[Rational]) -> Rational {
        self.basis
            .iter()
            .zip(&self.b)
            .fold(Rational::zero(), |acc, (&c, v)| acc + &cost[c] * v)
    }
}

/// Two-phase exact simplex with Bland's anti-cycling rule. All variables are non-negative.
pub fn lp_solve(lp: &LinearProgram) -> Result<LpOutcome, NumericsError> {
    let n = lp.num_vars;
    if lp.objective.len() != n {
        return Err(NumericsError::Dimension(format!(
            "objective has {} coefficients for {} variables",
            lp.objective.len(),
            n
        )));
    }
    for (i, c) in lp.constraints.iter().enumerate() {
        if c.coeffs.len() != n {
            return Err(NumericsError::Dimension(format!(
                "constraint {} has {} coefficients for {} variables",
                i,
                c.coeffs.len(),
                n
            )));
        }
    }
    let m = lp.constraints.len();
    // normalize every row to a non-negative right-hand side
    let rows: Vec<(Vector, Relation, Rational)> = lp
        .constraints
        .iter()
        .map(|c| {
            if c.rhs.is_negative() {
                let rel = match c.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (c.coeffs.iter().map(|x| -x).collect(), rel, -&c.rhs)
            } else {
                (c.coeffs.clone(), c.relation, c.rhs.clone())
            }
        })
        .collect();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let ncols = n + n_slack + n_art;
    let mut t = Tableau {
        a: Vec::with_capacity(m),
        b: Vec::with_capacity(m),
        basis: Vec::with_capacity(m),
        artificial: vec![false; ncols],
    };
    let (mut next_slack, mut next_art) = (n, n + n_slack);
    for (coeffs, rel, rhs) in rows {
        let mut row = coeffs;
        row.resize(ncols, Rational::zero());
        match rel {
            Relation::Le => {
                row[next_slack] = Rational::one();
                t.basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -Rational::one();
                next_slack += 1;
                row[next_art] = Rational::one();
                t.artificial[next_art] = true;
                t.basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = Rational::one();
                t.artificial[next_art] = true;
                t.basis.push(next_art);
                next_art += 1;
            }
        }
        t.a.push(row);
        t.b.push(rhs);
    }

    if n_art > 0 {
        let cost: Vector = (0..ncols)
            .map(|j| if t.artificial[j] { Rational::one() } else { Rational::zero() })
            .collect();
        t.minimize(&cost, |_| true);
        if t.value(&cost).is_positive() {
            return Ok(LpOutcome::Infeasible);
        }
        // drive zero-level artificials out of the basis, dropping redundant rows
        let mut i = 0;
        while i < t.a.len() {
            if t.artificial[t.basis[i]] {
                match (0..ncols).find(|&j| !t.artificial[j] && !t.a[i][j].is_zero()) {
                    Some(j) => t.pivot(i, j),
                    None => {
                        t.a.remove(i);
                        t.b.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let mut cost = vec![Rational::zero(); ncols];
    for (j, c) in lp.objective.iter().enumerate() {
        cost[j] = match lp.sense {
            Sense::Minimize => c.clone(),
            Sense::Maximize => -c,
        };
    }
    let artificial = t.artificial.clone();
    if !t.minimize(&cost, |j| !artificial[j]) {
        return Ok(LpOutcome::Unbounded);
    }
    let mut point = vec![Rational::zero(); n];
    for (i, &bi) in t.basis.iter().enumerate() {
        if bi < n {
            point[bi] = t.b[i].clone();
        }
    }
    let value = point
        .iter()
        .zip(&lp.objective)
        .fold(Rational::zero(), |acc, (x, c)| acc + x * c);
    Ok(LpOutcome::Optimal { value, point })
}

/// Decides whether `point` is a convex combination of `generators`; returns the coefficients.
pub fn hull_member(point: &[Rational], generators: &[Vector]) -> Result<Option<Vector>, NumericsError> {
    if generators.is_empty() {
        return Err(NumericsError::EmptyGenerators);
    }
    let d = point.len();
    if let Some(g) = generators.iter().find(|g| g.len() != d) {
        return Err(NumericsError::Dimension(format!(
            "generator of length {} against a point of length {}",
            g.len(),
            d
        )));
    }
    let k = generators.len();
    let mut constraints = Vec::with_capacity(d + 1);
    constraints.push(Constraint::new(vec![Rational::one(); k], Relation::Eq, Rational::one()));
    for i in 0..d {
        let coeffs: Vector = generators.iter().map(|g| g[i].clone()).collect();
        if coeffs.iter().all(Zero::is_zero) {
            if !point[i].is_zero() {
                return Ok(None);
            }
            continue;
        }
        constraints.push(Constraint::new(coeffs, Relation::Eq, point[i].clone()));
    }
    let lp = LinearProgram {
        num_vars: k,
        objective: vec![Rational::zero(); k],
        sense: Sense::Minimize,
        constraints,
    };
    Ok(match lp_solve(&lp)? {
        LpOutcome::Optimal { point, .. } => Some(point),
        _ => None,
    })
}
