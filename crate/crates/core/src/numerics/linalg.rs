use num_traits::Zero;

use super::{NumericsError, Rational, Vector};

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| {
        if x.is_zero() || y.is_zero() {
            acc
        } else {
            acc + x * y
        }
    })
}

/// A linear subspace kept as a basis in reduced row-echelon form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    dim: usize,
    // (pivot column, row); rows sorted by pivot, pivot entry 1, zero elsewhere in pivot columns
    rows: Vec<(usize, Vector)>,
}

impl Subspace {
    pub fn new(dim: usize) -> Self {
        Subspace { dim, rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> impl Iterator<Item = &Vector> {
        self.rows.iter().map(|(_, r)| r)
    }

    /// Residual of `v` after eliminating every pivot column.
    pub fn reduce(&self, v: &[Rational]) -> Result<Vector, NumericsError> {
        if v.len() != self.dim {
            return Err(NumericsError::Dimension(format!(
                "vector of length {} in a {}-dimensional space",
                v.len(),
                self.dim
            )));
        }
        let mut r = v.to_vec();
        for (p, row) in &self.rows {
            if r[*p].is_zero() {
                continue;
            }
            let f = r[*p].clone();
            for (x, y) in r.iter_mut().zip(row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        Ok(r)
    }

    pub fn contains(&self, v: &[Rational]) -> Result<bool, NumericsError> {
        Ok(self.reduce(v)?.iter().all(Zero::is_zero))
    }

    /// Adds `v` to the spanning set; returns whether the span grew.
    pub fn insert(&mut self, v: &[Rational]) -> Result<bool, NumericsError> {
        let mut r = self.reduce(v)?;
        let Some(p) = r.iter().position(|x| !x.is_zero()) else {
            return Ok(false);
        };
        let lead = r[p].clone();
        for x in r.iter_mut() {
            *x /= &lead;
        }
        for (_, row) in self.rows.iter_mut() {
            if row[p].is_zero() {
                continue;
            }
            let f = row[p].clone();
            for (x, y) in row.iter_mut().zip(&r) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        let at = self.rows.partition_point(|(q, _)| *q < p);
        self.rows.insert(at, (p, r));
        Ok(true)
    }
}

/// Functional form of [`Subspace::insert`].
pub fn span_insert(space: &Subspace, v: &[Rational]) -> Result<(Subspace, bool), NumericsError> {
    let mut s = space.clone();
    let changed = s.insert(v)?;
    Ok((s, changed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{int, ratio};

    fn e(i: usize, n: usize) -> Vector {
        (0..n).map(|j| if i == j { int(1) } else { int(0) }).collect()
    }

    #[test]
    fn zero_vector_is_already_in_span() {
        let s = Subspace::new(3);
        let (s2, changed) = span_insert(&s, &[int(0), int(0), int(0)]).unwrap();
        assert!(!changed);
        assert_eq!(s2.rank(), 0);
    }

    #[test]
    fn scalar_multiple_is_redundant() {
        let mut s = Subspace::new(3);
        assert!(s.insert(&e(0, 3)).unwrap());
        assert!(!s.insert(&[int(2), int(0), int(0)]).unwrap());
    }

    #[test]
    fn two_units_give_rank_two() {
        let mut s = Subspace::new(3);
        s.insert(&e(0, 3)).unwrap();
        s.insert(&e(1, 3)).unwrap();
        assert_eq!(s.rank(), 2);
        assert!(s.contains(&[ratio(1, 3), int(-4), int(0)]).unwrap());
        assert!(!s.contains(&e(2, 3)).unwrap());
    }

    #[test]
    fn basis_stays_reduced() {
        let mut s = Subspace::new(3);
        s.insert(&[int(1), int(1), int(0)]).unwrap();
        s.insert(&[int(0), int(1), int(1)]).unwrap();
        let b: Vec<_> = s.basis().cloned().collect();
        assert_eq!(b[0], vec![int(1), int(0), int(-1)]);
        assert_eq!(b[1], vec![int(0), int(1), int(1)]);
    }

    #[test]
    fn dimension_checked() {
        assert!(Subspace::new(2).insert(&[int(1)]).is_err());
    }
}
