use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::numerics::Rational;

pub type StateId = usize;

/// Sparse finite measure over state indices; zero entries are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Dist(BTreeMap<StateId, Rational>);

impl Dist {
    pub fn dirac(s: StateId) -> Self {
        let mut m = BTreeMap::new();
        m.insert(s, Rational::one());
        Dist(m)
    }

    pub fn empty() -> Self {
        Dist(BTreeMap::new())
    }

    /// Sums repeated entries and drops zeros.
    pub fn from_entries(entries: impl IntoIterator<Item = (StateId, Rational)>) -> Self {
        let mut d = Dist::empty();
        for (s, p) in entries {
            d.add(s, &p);
        }
        d
    }

    pub fn from_dense(v: &[Rational]) -> Self {
        Dist::from_entries(v.iter().cloned().enumerate())
    }

    pub fn to_dense(&self, n: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); n];
        for (&s, p) in &self.0 {
            v[s] = p.clone();
        }
        v
    }

    pub fn add(&mut self, s: StateId, p: &Rational) {
        if p.is_zero() {
            return;
        }
        let e = self.0.entry(s).or_insert_with(Rational::zero);
        *e += p;
        if e.is_zero() {
            self.0.remove(&s);
        }
    }

    /// Adds `w · other` in place.
    pub fn add_scaled(&mut self, w: &Rational, other: &Dist) {
        if w.is_zero() {
            return;
        }
        for (&s, p) in &other.0 {
            self.add(s, &(w * p));
        }
    }

    pub fn scaled(&self, w: &Rational) -> Dist {
        let mut d = Dist::empty();
        d.add_scaled(w, self);
        d
    }

    pub fn combine<'a>(parts: impl IntoIterator<Item = (&'a Rational, &'a Dist)>) -> Dist {
        let mut d = Dist::empty();
        for (w, p) in parts {
            d.add_scaled(w, p);
        }
        d
    }

    pub fn get(&self, s: StateId) -> Rational {
        self.0.get(&s).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateId, &Rational)> {
        self.0.iter().map(|(&s, p)| (s, p))
    }

    pub fn support(&self) -> impl Iterator<Item = StateId> + '_ {
        self.0.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mass(&self) -> Rational {
        self.0.values().fold(Rational::zero(), |a, p| a + p)
    }

    pub fn is_probability(&self) -> bool {
        self.0.values().all(|p| p > &Rational::zero()) && self.mass().is_one()
    }

    pub fn mass_where(&self, pred: impl Fn(StateId) -> bool) -> Rational {
        self.0
            .iter()
            .filter(|(s, _)| pred(**s))
            .fold(Rational::zero(), |a, (_, p)| a + p)
    }

    /// The part of the measure on states satisfying `pred`.
    pub fn restrict(&self, pred: impl Fn(StateId) -> bool) -> Dist {
        Dist(self.0.iter().filter(|(s, _)| pred(**s)).map(|(s, p)| (*s, p.clone())).collect())
    }

    pub fn dot(&self, v: &[Rational]) -> Rational {
        self.0.iter().fold(Rational::zero(), |a, (&s, p)| if v[s].is_zero() { a } else { a + p * &v[s] })
    }

    pub fn map_states(&self, f: impl Fn(StateId) -> StateId) -> Dist {
        Dist::from_entries(self.0.iter().map(|(&s, p)| (f(s), p.clone())))
    }

    /// Renders `name:p,name:p` using the supplied state names.
    pub fn display<'a>(&'a self, names: &'a [String]) -> DistDisplay<'a> {
        DistDisplay { dist: self, names }
    }
}

pub struct DistDisplay<'a> {
    dist: &'a Dist,
    names: &'a [String],
}

impl fmt::Display for DistDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dist.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, p)) in self.dist.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}:{}", self.names[s], p)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ratio;

    #[test]
    fn merging_and_zero_dropping() {
        let d = Dist::from_entries([(1, ratio(1, 4)), (0, ratio(1, 2)), (1, ratio(1, 4)), (2, ratio(0, 1))]);
        assert_eq!(d.len(), 2);
        assert_eq!(d.get(1), ratio(1, 2));
        assert!(d.is_probability());
    }

    #[test]
    fn combination() {
        let a = Dist::dirac(0);
        let b = Dist::dirac(1);
        let h = ratio(1, 2);
        let m = Dist::combine([(&h, &a), (&h, &b)]);
        assert_eq!(m, Dist::from_entries([(0, h.clone()), (1, h.clone())]));
        let names = vec!["x".to_string(), "y".to_string()];
        assert_eq!(m.display(&names).to_string(), "x:1/2,y:1/2");
    }
}
