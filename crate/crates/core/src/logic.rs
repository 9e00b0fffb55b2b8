//! The quantitative modal logic: formulas, parsing and printing, discounted evaluation, and
//! distance lower bounds from formula value gaps.
//!
//! Grammar (whitespace-insensitive):
//! `B{ {p q}, {} }` | `<act> φ` | `! φ` | `φ (+) rational` | `AND(φ, φ, ...)` | `( φ )`.
//! The postfix shift binds to the unary expression on its left.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};

use crate::automata::{ensure_extended, Automaton, Dist, Label};
use crate::error::{max_nodes, Error, Result};
use crate::numerics::{abs, parse_rational, Rational, Vector};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    /// label classes, each a set of proposition names
    ClassFamily(Vec<BTreeSet<String>>),
    Shift(Box<Formula>, Rational),
    Neg(Box<Formula>),
    Conj(Vec<Formula>),
    Diamond(String, Box<Formula>),
}

impl Formula {
    pub fn class(props: &[&str]) -> Formula {
        Formula::ClassFamily(vec![props.iter().map(|p| p.to_string()).collect()])
    }

    pub fn diamond(action: &str, inner: Formula) -> Formula {
        Formula::Diamond(action.to_string(), Box::new(inner))
    }

    pub fn neg(inner: Formula) -> Formula {
        Formula::Neg(Box::new(inner))
    }

    /// Whether only class families, negation and diamonds occur.
    pub fn is_affine(&self) -> bool {
        match self {
            Formula::ClassFamily(_) => true,
            Formula::Neg(f) | Formula::Diamond(_, f) => f.is_affine(),
            Formula::Shift(..) | Formula::Conj(_) => false,
        }
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::ClassFamily(_) => 0,
            Formula::Neg(f) | Formula::Shift(f, _) => f.modal_depth(),
            Formula::Diamond(_, f) => 1 + f.modal_depth(),
            Formula::Conj(fs) => fs.iter().map(Formula::modal_depth).max().unwrap_or(0),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let unary = |f: &mut fmt::Formatter<'_>, x: &Formula| match x {
            Formula::Shift(..) => write!(f, "({x})"),
            _ => write!(f, "{x}"),
        };
        match self {
            Formula::ClassFamily(classes) => {
                let body: Vec<String> =
                    classes.iter().map(|c| format!("{{{}}}", c.iter().cloned().collect::<Vec<_>>().join(" "))).collect();
                write!(f, "B{{{}}}", body.join(","))
            }
            Formula::Shift(x, p) => write!(f, "{x} (+) {p}"),
            Formula::Neg(x) => {
                write!(f, "!")?;
                unary(f, x)
            }
            Formula::Diamond(a, x) => {
                write!(f, "<{a}>")?;
                unary(f, x)
            }
            Formula::Conj(xs) => {
                write!(f, "AND(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

fn is_ident_char(c: char) -> bool {
    !c.is_whitespace() && !"{}()<>!,@;:#".contains(c)
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::FormulaSyntax { pos: self.pos, message: message.into() })
    }
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }
    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }
    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }
    fn expect(&mut self, s: &str) -> Result<()> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }
    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !is_ident_char(c) {
                break;
            }
            self.pos += c.len_utf8();
        }
        if start == self.pos {
            return self.err("expected an identifier");
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while self.eat("(+)") {
            self.skip_ws();
            let start = self.pos;
            while let Some(c) = self.src[self.pos..].chars().next() {
                if !(c.is_ascii_digit() || c == '/' || c == '-') {
                    break;
                }
                self.pos += 1;
            }
            let text = &self.src[start..self.pos];
            let p = match parse_rational(text) {
                Ok(p) => p,
                Err(e) => {
                    self.pos = start;
                    return self.err(format!("bad shift amount `{text}`: {e}"));
                }
            };
            if p < Rational::zero() || p > Rational::one() {
                self.pos = start;
                return self.err(format!("shift amount {p} is outside [0,1]"));
            }
            f = Formula::Shift(Box::new(f), p);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                Ok(Formula::Neg(Box::new(self.unary()?)))
            }
            Some('<') => {
                self.pos += 1;
                let a = self.ident()?;
                self.expect(">")?;
                Ok(Formula::Diamond(a, Box::new(self.unary()?)))
            }
            Some('(') => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(")")?;
                Ok(f)
            }
            Some(_) if self.eat("B{") => {
                let mut classes = Vec::new();
                if !self.eat("}") {
                    loop {
                        self.expect("{")?;
                        let mut c = BTreeSet::new();
                        while self.peek() != Some('}') {
                            c.insert(self.ident()?);
                        }
                        self.expect("}")?;
                        classes.push(c);
                        if self.eat(",") {
                            continue;
                        }
                        self.expect("}")?;
                        break;
                    }
                }
                Ok(Formula::ClassFamily(classes))
            }
            Some(_) if self.eat("AND(") => {
                let mut parts = vec![self.formula()?];
                while self.eat(",") {
                    parts.push(self.formula()?);
                }
                self.expect(")")?;
                Ok(Formula::Conj(parts))
            }
            Some(_) => self.err("expected `B{`, `<`, `!`, `AND(` or `(`"),
            None => self.err("unexpected end of formula"),
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut p = Parser { src: text, pos: 0 };
    let f = p.formula()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(f)
}

fn resolve_family(a: &Automaton, classes: &[BTreeSet<String>]) -> Result<Vec<Label>> {
    classes
        .iter()
        .map(|c| {
            c.iter()
                .map(|p| a.prop_id(p).ok_or_else(|| Error::Rejected(format!("unknown proposition `{p}`"))))
                .collect::<Result<Label>>()
        })
        .collect()
}

fn family_vector(a: &Automaton, classes: &[BTreeSet<String>]) -> Result<Vector> {
    let family = resolve_family(a, classes)?;
    Ok((0..a.num_states())
        .map(|s| if family.contains(a.label(s)) { Rational::one() } else { Rational::zero() })
        .collect())
}

fn check_gamma(gamma: &Rational) -> Result<()> {
    if *gamma <= Rational::zero() || *gamma > Rational::one() {
        return Err(Error::Rejected(format!("discount {gamma} is outside (0,1]")));
    }
    Ok(())
}

/// Per-state values of an affine-fragment formula over `g` (already input-enabled).
fn affine_vector(g: &Automaton, phi: &Formula, gamma: &Rational) -> Result<Vector> {
    match phi {
        Formula::ClassFamily(c) => family_vector(g, c),
        Formula::Neg(x) => Ok(affine_vector(g, x, gamma)?.into_iter().map(|v| Rational::one() - v).collect()),
        Formula::Diamond(act, x) => {
            let xa = g.action_id(act).ok_or_else(|| Error::Rejected(format!("unknown action `{act}`")))?;
            let v = affine_vector(g, x, gamma)?;
            Ok(diamond_vector(g, xa, &v, gamma))
        }
        other => Err(Error::OutsideFragment(other.to_string())),
    }
}

fn diamond_vector(g: &Automaton, x: usize, v: &[Rational], gamma: &Rational) -> Vector {
    (0..g.num_states())
        .map(|s| gamma * g.choices(s, x).map(|c| c.dot(v)).max().unwrap_or_default())
        .collect()
}

/// Exact value on any automaton for formulas built from class families, negation and diamonds.
pub fn eval_affine(a: &Automaton, phi: &Formula, mu: &Dist, gamma: &Rational) -> Result<Rational> {
    check_gamma(gamma)?;
    let g = ensure_extended(a)?.automaton;
    Ok(mu.dot(&affine_vector(&g, phi, gamma)?))
}

fn eval_on(g: &Automaton, phi: &Formula, mu: &Dist, gamma: &Rational) -> Result<Rational> {
    Ok(match phi {
        Formula::ClassFamily(c) => mu.dot(&family_vector(g, c)?),
        Formula::Shift(x, p) => {
            let v = eval_on(g, x, mu, gamma)? + p;
            if v > Rational::one() {
                Rational::one()
            } else {
                v
            }
        }
        Formula::Neg(x) => Rational::one() - eval_on(g, x, mu, gamma)?,
        Formula::Conj(xs) => {
            let mut best: Option<Rational> = None;
            for x in xs {
                let v = eval_on(g, x, mu, gamma)?;
                best = Some(match best {
                    Some(b) if b <= v => b,
                    _ => v,
                });
            }
            best.ok_or_else(|| Error::Rejected("empty conjunction".into()))?
        }
        Formula::Diamond(act, x) => {
            let xa = g.action_id(act).ok_or_else(|| Error::Rejected(format!("unknown action `{act}`")))?;
            if mu.support().all(|s| g.choice_count(s, xa) == 1) {
                let mut next = Dist::empty();
                for (s, p) in mu.iter() {
                    next.add_scaled(p, g.choice(s, xa, 0));
                }
                gamma * eval_on(g, x, &next, gamma)?
            } else if x.is_affine() {
                mu.dot(&diamond_vector(g, xa, &affine_vector(g, x, gamma)?, gamma))
            } else {
                return Err(Error::Nondeterministic(format!(
                    "`{phi}` needs a supremum of a non-affine value over several successors; use the affine fragment"
                )));
            }
        }
    })
}

/// Exact value of φ at μ. Every connective is supported where successors are unique; under a
/// nondeterministic step only affine subformulas are accepted.
pub fn eval(a: &Automaton, phi: &Formula, mu: &Dist, gamma: &Rational) -> Result<Rational> {
    check_gamma(gamma)?;
    let g = ensure_extended(a)?.automaton;
    eval_on(&g, phi, mu, gamma)
}

/// Largest value gap over diamond strings of length ≤ `depth` ending in a single label class or
/// its negation. Strings are tried shortest first, then in action order; the first maximum wins.
pub fn distance_lb(a: &Automaton, mu: &Dist, nu: &Dist, gamma: &Rational, depth: usize) -> Result<(Rational, Formula)> {
    check_gamma(gamma)?;
    let g = ensure_extended(a)?.automaton;
    let n = g.num_states();
    let mut terminals: Vec<(Formula, Vector)> = Vec::new();
    for l in g.label_classes() {
        let names: Vec<&str> = g.label_names(&l);
        let ind: Vector = (0..n).map(|s| if *g.label(s) == l { Rational::one() } else { Rational::zero() }).collect();
        let neg: Vector = ind.iter().map(|v| Rational::one() - v).collect();
        terminals.push((Formula::class(&names), ind));
        terminals.push((Formula::neg(Formula::class(&names)), neg));
    }
    let cap = max_nodes();
    let mut best = Rational::zero();
    let mut witness = terminals.first().map(|t| t.0.clone()).expect("at least one label class");
    // level entries: (action word, terminal index, vector)
    let mut level: Vec<(Vec<usize>, usize, Vector)> =
        terminals.iter().enumerate().map(|(i, (_, v))| (Vec::new(), i, v.clone())).collect();
    let mut explored = 0usize;
    for len in 0..=depth {
        if len > 0 {
            let mut next = Vec::with_capacity(level.len() * g.num_actions());
            for x in 0..g.num_actions() {
                for (word, t, v) in &level {
                    let mut w = vec![x];
                    w.extend(word);
                    next.push((w, *t, diamond_vector(&g, x, v, gamma)));
                }
            }
            // shortest first, then lexicographic in the action word, then terminal order
            next.sort_by(|p, q| p.0.cmp(&q.0).then(p.1.cmp(&q.1)));
            level = next;
        }
        for (word, t, v) in &level {
            explored += 1;
            if explored > cap {
                return Err(Error::CapExceeded { what: "formula search".into(), limit: cap });
            }
            let gap = abs(&(mu.dot(v) - nu.dot(v)));
            if gap > best {
                best = gap;
                let mut f = terminals[*t].0.clone();
                for &x in word.iter().rev() {
                    f = Formula::diamond(&g.actions()[x], f);
                }
                witness = f;
            }
        }
    }
    Ok((best, witness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{exam1, fixture};
    use crate::numerics::ratio;

    #[test]
    fn parses_examples() {
        assert_eq!(parse_formula("B{ {a} }").unwrap(), Formula::class(&["a"]));
        assert_eq!(parse_formula("<a><a>B{ {a} }").unwrap(), Formula::diamond("a", Formula::diamond("a", Formula::class(&["a"]))));
        assert_eq!(
            parse_formula("!(B{} (+) 1/4)").unwrap(),
            Formula::neg(Formula::Shift(Box::new(Formula::ClassFamily(vec![])), ratio(1, 4)))
        );
        let f = parse_formula("AND(<a>B{{p q},{}}, !B{{r}} (+) 1/2)").unwrap();
        assert!(matches!(f, Formula::Conj(ref v) if v.len() == 2));
    }

    #[test]
    fn printer_round_trips() {
        for text in ["B{{a}}", "<a><a>B{{a}}", "!(B{} (+) 1/4)", "AND(<a>B{{p q},{}}, !B{{r}} (+) 1/2)", "<b>(B{{}} (+) 1) (+) 0"] {
            let f = parse_formula(text).unwrap();
            assert_eq!(parse_formula(&f.to_string()).unwrap(), f, "{text}");
        }
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse_formula("B{ {a} "), Err(Error::FormulaSyntax { .. })));
        assert!(matches!(parse_formula("B{} (+) 3/2"), Err(Error::FormulaSyntax { pos: 8, .. })));
        assert!(matches!(parse_formula("<a>"), Err(Error::FormulaSyntax { .. })));
        assert!(matches!(parse_formula("B{} extra"), Err(Error::FormulaSyntax { .. })));
    }

    #[test]
    fn exam1_values() {
        let (e1, e2) = (ratio(1, 5), ratio(1, 10));
        let a = exam1(&e1, &e2).unwrap();
        let phi = parse_formula("<a><a>B{{a}}").unwrap();
        let one = Rational::one();
        let q = a.parse_dist("q:1").unwrap();
        let q2 = a.parse_dist("q':1").unwrap();
        assert_eq!(eval(&a, &phi, &q, &one).unwrap(), ratio(1, 2) * (Rational::one() + &e1 - &e2));
        assert_eq!(eval(&a, &phi, &q2, &one).unwrap(), ratio(1, 2));
        assert_eq!(eval_affine(&a, &phi, &q, &one).unwrap(), eval(&a, &phi, &q, &one).unwrap());
    }

    #[test]
    fn exam1_lower_bound() {
        let a = exam1(&ratio(1, 5), &ratio(1, 10)).unwrap();
        let q = a.parse_dist("q:1").unwrap();
        let q2 = a.parse_dist("q':1").unwrap();
        let (lb, w) = distance_lb(&a, &q, &q2, &ratio(1, 2), 3).unwrap();
        assert_eq!(lb, ratio(1, 80));
        assert_eq!(w.to_string(), "<a><a>B{{a}}");
        assert_eq!(distance_lb(&a, &q, &q, &ratio(1, 2), 3).unwrap().0, Rational::zero());
    }

    #[test]
    fn trace_jan_affine() {
        let f = fixture("trace-jan").unwrap();
        let a = &f.automaton;
        // the label class shared by t3 (and every other original state)
        let phi = parse_formula("<a><b>B{{circle}}").unwrap();
        assert_eq!(eval_affine(a, &phi, &f.mu, &Rational::one()).unwrap(), Rational::one());
        assert_eq!(eval_affine(a, &phi, &f.nu, &Rational::one()).unwrap(), Rational::one());
        assert!(matches!(eval_affine(a, &parse_formula("B{} (+) 1/2").unwrap(), &f.mu, &Rational::one()), Err(Error::OutsideFragment(_))));
    }

    #[test]
    fn one_step_max_over_choices() {
        let f = fixture("sim-coarser").unwrap();
        let a = &f.automaton;
        let s1 = a.parse_dist("s1:1").unwrap();
        let phi = parse_formula("<a>B{{box}}").unwrap();
        assert_eq!(eval_affine(a, &phi, &s1, &Rational::one()).unwrap(), Rational::one());
        let phi = parse_formula("<a>!B{{box}}").unwrap();
        assert_eq!(eval_affine(a, &phi, &s1, &Rational::one()).unwrap(), Rational::one());
        // under a nondeterministic step only the affine fragment is accepted
        let shifted = parse_formula("<a>(B{{box}} (+) 1/2)").unwrap();
        assert!(matches!(eval(a, &shifted, &s1, &Rational::one()), Err(Error::Nondeterministic(_))));
    }

    #[test]
    fn sim_coarser_gap_is_zero() {
        let f = fixture("sim-coarser").unwrap();
        assert_eq!(distance_lb(&f.automaton, &f.mu, &f.nu, &ratio(1, 2), 4).unwrap().0, Rational::zero());
    }
}
