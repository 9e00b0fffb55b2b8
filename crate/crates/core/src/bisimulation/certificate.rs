//! Coinductive certificates for positive bisimilarity claims.
//!
//! A certificate lists pairs of distributions and, for every pair, attacker step and attacker
//! vertex, a defender answer plus a decomposition of the successor pair. Accepted
//! decompositions are convex combinations of listed pairs, identity pairs (ω, ω), and pairs
//! padded with the dead state. The checked relation is then closed under these rules, so
//! acceptance implies bisimilarity. Mixtures of several listed pairs and padding are only
//! admitted in the plain semantics; the other semantics take one listed pair or identity.

use std::collections::BTreeSet;
use std::fmt::Write;
use std::str::FromStr;

use num_traits::{One, Zero};

use super::game::{Defender, Game, Semantics};
use crate::automata::{ActionId, Automaton, Composition, Dist, StateId};
use crate::error::{Error, Result};
use crate::lifting::{is_consistent, StepTag};
use crate::numerics::{lp_solve, parse_rational, Constraint, LinearProgram, LpOutcome, Rational, Relation, Sense};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Pair(usize),
    Identity,
    Pad(usize, Rational),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DefenderSpec {
    /// (state name, coefficient, choice index)
    Parts(Vec<(String, Rational, usize)>),
    /// (coefficient, vertex index)
    Hull(Vec<(Rational, usize)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepSpec {
    Action(String),
    ActionSet(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub pair: usize,
    pub step: StepSpec,
    pub vertex: usize,
    pub defender: DefenderSpec,
    pub decompose: Vec<(Rational, Target)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub semantics: Semantics,
    /// distribution literals as written
    pub pairs: Vec<(String, String)>,
    pub splits: Vec<(usize, Vec<(Rational, usize)>)>,
    pub responses: Vec<Response>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertVerdict {
    Accepted { pairs: usize, obligations: usize },
    Rejected(String),
}

impl CertVerdict {
    pub fn accepted(&self) -> bool {
        matches!(self, CertVerdict::Accepted { .. })
    }
}

fn tokenize(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in s.chars() {
        if ch.is_whitespace() || "{}*():@,;".contains(ch) {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            if !ch.is_whitespace() {
                out.push(ch.to_string());
            }
        } else {
            cur.push(ch);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

struct Cursor<'a> {
    toks: &'a [String],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, message: msg.into() }
    }
    fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).map(String::as_str)
    }
    fn next(&mut self) -> Result<&'a str> {
        let t = self.toks.get(self.pos).ok_or_else(|| self.err("unexpected end of line"))?;
        self.pos += 1;
        Ok(t)
    }
    fn expect(&mut self, t: &str) -> Result<()> {
        let got = self.next()?;
        if got != t {
            return Err(self.err(format!("expected `{t}`, found `{got}`")));
        }
        Ok(())
    }
    fn index(&mut self) -> Result<usize> {
        let t = self.next()?;
        t.parse().map_err(|_| self.err(format!("expected an index, found `{t}`")))
    }
    fn rational(&mut self) -> Result<Rational> {
        let t = self.next()?;
        parse_rational(t).map_err(|e| self.err(e.to_string()))
    }
    fn done(&self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(self.err(format!("unexpected `{t}`"))),
        }
    }
}

pub fn parse_certificate(text: &str) -> Result<Certificate> {
    let mut semantics = None;
    let mut pairs = Vec::new();
    let mut splits = Vec::new();
    let mut responses = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (kw, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let perr = |m: String| Error::Parse { line, message: m };
        match kw {
            "semantics" => {
                semantics = Some(Semantics::from_str(rest.trim()).map_err(|e| perr(e.to_string()))?);
            }
            "pair" => {
                let (idx, body) = rest.split_once(':').ok_or_else(|| perr("expected `pair <n>: <dist> ; <dist>`".into()))?;
                let idx: usize = idx.trim().parse().map_err(|_| perr(format!("bad pair index `{}`", idx.trim())))?;
                if idx != pairs.len() {
                    return Err(perr(format!("pairs must be numbered in order; expected {}", pairs.len())));
                }
                let (l, r) = body.split_once(';').ok_or_else(|| perr("expected `;` between the two distributions".into()))?;
                pairs.push((l.trim().to_string(), r.trim().to_string()));
            }
            "split" => {
                let toks = tokenize(rest);
                let mut c = Cursor { toks: &toks, pos: 0, line };
                let p = c.index()?;
                c.expect("{")?;
                let mut terms = Vec::new();
                while c.peek() != Some("}") {
                    let w = c.rational()?;
                    c.expect("*")?;
                    terms.push((w, c.index()?));
                }
                c.expect("}")?;
                c.done()?;
                splits.push((p, terms));
            }
            "respond" => {
                let toks = tokenize(rest);
                let mut c = Cursor { toks: &toks, pos: 0, line };
                let pair = c.index()?;
                let step = if c.peek() == Some("{") {
                    c.next()?;
                    let mut acts = Vec::new();
                    loop {
                        acts.push(c.next()?.to_string());
                        match c.next()? {
                            "," => continue,
                            "}" => break,
                            t => return Err(c.err(format!("unexpected `{t}` in action set"))),
                        }
                    }
                    StepSpec::ActionSet(acts)
                } else {
                    StepSpec::Action(c.next()?.to_string())
                };
                let vertex = c.index()?;
                c.expect(":")?;
                c.expect("defender")?;
                let defender = if c.peek() == Some("hull") {
                    c.next()?;
                    c.expect("{")?;
                    let mut entries = Vec::new();
                    while c.peek() != Some("}") {
                        let w = c.rational()?;
                        c.expect("@")?;
                        entries.push((w, c.index()?));
                    }
                    c.expect("}")?;
                    DefenderSpec::Hull(entries)
                } else {
                    c.expect("{")?;
                    let mut entries = Vec::new();
                    while c.peek() != Some("}") {
                        let s = c.next()?.to_string();
                        c.expect(":")?;
                        let w = c.rational()?;
                        c.expect("@")?;
                        entries.push((s, w, c.index()?));
                    }
                    c.expect("}")?;
                    DefenderSpec::Parts(entries)
                };
                c.expect("decompose")?;
                c.expect("{")?;
                let mut decompose = Vec::new();
                while c.peek() != Some("}") {
                    let w = c.rational()?;
                    c.expect("*")?;
                    let target = match c.next()? {
                        "id" => Target::Identity,
                        "pad" => {
                            c.expect("(")?;
                            let j = c.index()?;
                            c.expect(",")?;
                            let p = c.rational()?;
                            c.expect(")")?;
                            Target::Pad(j, p)
                        }
                        t => Target::Pair(t.parse().map_err(|_| c.err(format!("bad decomposition target `{t}`")))?),
                    };
                    decompose.push((w, target));
                }
                c.expect("}")?;
                c.done()?;
                responses.push(Response { pair, step, vertex, defender, decompose });
            }
            other => return Err(perr(format!("unknown directive `{other}`"))),
        }
    }
    let semantics = semantics.ok_or_else(|| Error::Parse { line: 1, message: "missing `semantics` line".into() })?;
    Ok(Certificate { semantics, pairs, splits, responses })
}

fn step_text(step: &StepSpec) -> String {
    match step {
        StepSpec::Action(a) => a.clone(),
        StepSpec::ActionSet(v) => format!("{{{}}}", v.join(",")),
    }
}

fn fmt_rat(r: &Rational) -> String {
    r.to_string()
}

fn braced(items: &[String]) -> String {
    if items.is_empty() {
        "{ }".into()
    } else {
        format!("{{ {} }}", items.join(" "))
    }
}

pub fn render_certificate(c: &Certificate) -> String {
    let mut out = String::new();
    writeln!(out, "semantics {}", c.semantics.name()).unwrap();
    for (i, (l, r)) in c.pairs.iter().enumerate() {
        writeln!(out, "pair {i}: {l} ; {r}").unwrap();
    }
    for (p, terms) in &c.splits {
        let body: Vec<String> = terms.iter().map(|(w, j)| format!("{} * {j}", fmt_rat(w))).collect();
        writeln!(out, "split {p} {}", braced(&body)).unwrap();
    }
    for r in &c.responses {
        let def = match &r.defender {
            DefenderSpec::Parts(v) => {
                let body: Vec<String> = v.iter().map(|(s, w, k)| format!("{s}: {}@{k}", fmt_rat(w))).collect();
                braced(&body)
            }
            DefenderSpec::Hull(v) => {
                let body: Vec<String> = v.iter().map(|(w, k)| format!("{}@{k}", fmt_rat(w))).collect();
                format!("hull {}", braced(&body))
            }
        };
        let dec: Vec<String> = r
            .decompose
            .iter()
            .map(|(w, t)| match t {
                Target::Identity => format!("{} * id", fmt_rat(w)),
                Target::Pair(j) => format!("{} * {j}", fmt_rat(w)),
                Target::Pad(j, p) => format!("{} * pad({j}, {})", fmt_rat(w), fmt_rat(p)),
            })
            .collect();
        writeln!(out, "respond {} {} {} : defender {def} decompose {}", r.pair, step_text(&r.step), r.vertex, braced(&dec))
            .unwrap();
    }
    out
}

fn resolve_step(g: &Automaton, step: &StepSpec) -> Result<StepTag> {
    let act = |n: &str| g.action_id(n).ok_or_else(|| Error::Rejected(format!("unknown action `{n}`")));
    Ok(match step {
        StepSpec::Action(a) => StepTag::Action(act(a)?),
        StepSpec::ActionSet(v) => StepTag::ActionSet(v.iter().map(|a| act(a)).collect::<Result<BTreeSet<ActionId>>>()?),
    })
}

/// Whether a written step stands for the enumerated attack on the given states.
fn same_step(g: &Automaton, written: &StepTag, attack: &StepTag, states: &[StateId]) -> bool {
    match (written, attack) {
        (StepTag::Action(x), StepTag::Action(y)) => x == y,
        (StepTag::ActionSet(x), StepTag::ActionSet(y)) => states.iter().all(|&s| {
            let ex: BTreeSet<ActionId> = x.iter().copied().filter(|&a| g.enables(s, a)).collect();
            let ey: BTreeSet<ActionId> = y.iter().copied().filter(|&a| g.enables(s, a)).collect();
            ex == ey
        }),
        _ => false,
    }
}

fn reject(msg: String) -> Result<CertVerdict> {
    Ok(CertVerdict::Rejected(msg))
}

/// Checks `cert` as a proof of μ ≈ ν. For the distributed semantics `comp` must be given and
/// the distributions live on the composite.
pub fn check_certificate(
    a: &Automaton,
    cert: &Certificate,
    mu: &Dist,
    nu: &Dist,
    comp: Option<&Composition>,
) -> Result<CertVerdict> {
    let game = Game::new(a, cert.semantics, comp)?;
    let g = &game.graph;
    let names = g.state_names();
    let plain = cert.semantics == Semantics::Plain;
    let mut pairs = Vec::new();
    for (i, (l, r)) in cert.pairs.iter().enumerate() {
        let (l, r) = match (g.parse_dist(l), g.parse_dist(r)) {
            (Ok(l), Ok(r)) => (l, r),
            (Err(e), _) | (_, Err(e)) => return reject(format!("pair {i}: {e}")),
        };
        if !l.is_probability() || !r.is_probability() {
            return reject(format!("pair {i}: distributions must have mass 1"));
        }
        pairs.push((l, r));
    }
    if mu != nu && !pairs.iter().any(|(l, r)| l == mu && r == nu) {
        return reject(format!("the queried pair {} ; {} is not listed", mu.display(names), nu.display(names)));
    }
    let mut obligations = 0;
    for (i, (l, r)) in pairs.iter().enumerate() {
        if l != r && !pairs.iter().any(|(x, y)| x == r && y == l) {
            return reject(format!("pair {i}: its reverse is not listed"));
        }
        if let Some((class, lm, rm)) = game.local_mismatch(l, r) {
            return reject(format!("pair {i}: {class} has mass {lm} vs {rm}"));
        }
        if cert.semantics == Semantics::Late && (!is_consistent(g, l) || !is_consistent(g, r)) {
            let Some((_, terms)) = cert.splits.iter().find(|(p, _)| *p == i) else {
                return reject(format!("pair {i}: inconsistent distributions need a `split` line"));
            };
            let (mut sl, mut sr, mut total) = (Dist::empty(), Dist::empty(), Rational::zero());
            for (w, j) in terms {
                let Some((pl, pr)) = pairs.get(*j) else { return reject(format!("split {i}: no pair {j}")) };
                if *w <= Rational::zero() {
                    return reject(format!("split {i}: weights must be positive"));
                }
                if !is_consistent(g, pl) || !is_consistent(g, pr) {
                    return reject(format!("split {i}: part {j} is not consistent"));
                }
                sl.add_scaled(w, pl);
                sr.add_scaled(w, pr);
                total += w;
            }
            if !total.is_one() || sl != *l || sr != *r {
                return reject(format!("split {i}: parts do not reconstruct the pair"));
            }
            continue;
        }
        for (attack, defender) in game.attacks(l, r)? {
            let states: Vec<StateId> = l.support().chain(r.support()).collect();
            let tag_text = attack.tag.display(g);
            for (vi, vertex) in attack.vertices.iter().enumerate() {
                obligations += 1;
                let at = format!("pair {i}, step {tag_text}, vertex {vi}");
                let mut found = None;
                for resp in cert.responses.iter().filter(|x| x.pair == i && x.vertex == vi) {
                    let written = match resolve_step(g, &resp.step) {
                        Ok(t) => t,
                        Err(e) => return reject(format!("{at}: {e}")),
                    };
                    if same_step(g, &written, &attack.tag, &states) {
                        found = Some(resp);
                        break;
                    }
                }
                let Some(resp) = found else { return reject(format!("{at}: no response given")) };
                let answer = match defender_successor(g, &defender, &resp.defender) {
                    Ok(d) => d,
                    Err(m) => return reject(format!("{at}: {m}")),
                };
                if let Err(m) = check_decomposition(&pairs, vertex, &answer, &resp.decompose, plain, game.bottom) {
                    return reject(format!("{at}: {m}"));
                }
            }
        }
    }
    Ok(CertVerdict::Accepted { pairs: pairs.len(), obligations })
}

fn defender_successor(g: &Automaton, defender: &Defender, spec: &DefenderSpec) -> std::result::Result<Dist, String> {
    match (defender, spec) {
        (Defender::Blocked, _) => Err("the defender has no step of this kind".into()),
        (Defender::Parts(parts), DefenderSpec::Parts(entries)) => {
            let mut out = Dist::empty();
            for (name, ..) in entries {
                let s = g.state_id(name).ok_or_else(|| format!("unknown state `{name}`"))?;
                if !parts.iter().any(|p| p.state == s) {
                    return Err(format!("`{name}` is not a defender support state"));
                }
            }
            for part in parts {
                let name = &g.state_names()[part.state];
                let mine: Vec<&(String, Rational, usize)> = entries.iter().filter(|(n, ..)| n == name).collect();
                if mine.is_empty() {
                    if part.choices.len() != 1 {
                        return Err(format!("`{name}` has several choices and no coefficients"));
                    }
                    out.add_scaled(&part.weight, &part.choices[0]);
                    continue;
                }
                let mut sum = Rational::zero();
                for (_, w, k) in mine {
                    if *w <= Rational::zero() || *w > Rational::one() {
                        return Err(format!("coefficient {w} of `{name}` is outside (0,1]"));
                    }
                    let c = part.choices.get(*k).ok_or_else(|| format!("`{name}` has no choice {k}"))?;
                    out.add_scaled(&(w * &part.weight), c);
                    sum += w;
                }
                if !sum.is_one() {
                    return Err(format!("coefficients of `{name}` sum to {sum}"));
                }
            }
            Ok(out)
        }
        (Defender::Hull(points), DefenderSpec::Hull(entries)) => {
            let mut out = Dist::empty();
            let mut sum = Rational::zero();
            for (w, k) in entries {
                if *w <= Rational::zero() {
                    return Err(format!("coefficient {w} is not positive"));
                }
                let p = points.get(*k).ok_or_else(|| format!("the defender has no vertex {k}"))?;
                out.add_scaled(w, p);
                sum += w;
            }
            if !sum.is_one() {
                return Err(format!("hull coefficients sum to {sum}"));
            }
            Ok(out)
        }
        (Defender::Parts(_), DefenderSpec::Hull(_)) => Err("expected per-state coefficients".into()),
        (Defender::Hull(_), DefenderSpec::Parts(_)) => Err("expected `hull` coefficients".into()),
    }
}

fn check_decomposition(
    pairs: &[(Dist, Dist)],
    left: &Dist,
    right: &Dist,
    terms: &[(Rational, Target)],
    plain: bool,
    bottom: Option<StateId>,
) -> std::result::Result<(), String> {
    if terms.is_empty() {
        return Err("empty decomposition".into());
    }
    let non_id = terms.iter().filter(|(_, t)| *t != Target::Identity).count();
    if !plain && non_id > 0 && terms.len() > 1 {
        return Err("this semantics admits a single listed pair or identity terms only".into());
    }
    let (mut sl, mut sr) = (Dist::empty(), Dist::empty());
    let (mut total, mut id_weight) = (Rational::zero(), Rational::zero());
    for (w, t) in terms {
        if *w <= Rational::zero() {
            return Err(format!("weight {w} is not positive"));
        }
        total += w;
        match t {
            Target::Identity => id_weight += w,
            Target::Pair(j) => {
                let (l, r) = pairs.get(*j).ok_or_else(|| format!("no pair {j}"))?;
                sl.add_scaled(w, l);
                sr.add_scaled(w, r);
            }
            Target::Pad(j, p) => {
                if !plain {
                    return Err("padding is only available in the plain semantics".into());
                }
                let bot = bottom.ok_or("no dead state to pad with")?;
                if *p <= Rational::zero() || *p > Rational::one() {
                    return Err(format!("padding factor {p} is outside (0,1]"));
                }
                let (l, r) = pairs.get(*j).ok_or_else(|| format!("no pair {j}"))?;
                let rest = (Rational::one() - p) * w;
                sl.add_scaled(&(w * p), l);
                sr.add_scaled(&(w * p), r);
                sl.add(bot, &rest);
                sr.add(bot, &rest);
            }
        }
    }
    if !total.is_one() {
        return Err(format!("weights sum to {total}"));
    }
    let mut res_l = left.clone();
    res_l.add_scaled(&-Rational::one(), &sl);
    let mut res_r = right.clone();
    res_r.add_scaled(&-Rational::one(), &sr);
    if res_l != res_r {
        return Err("the decomposition does not reconstruct both successors".into());
    }
    if res_l.iter().any(|(_, p)| *p < Rational::zero()) || res_l.mass() != id_weight {
        return Err("the identity part is not a nonnegative distribution of the stated weight".into());
    }
    Ok(())
}

/// Authoring helper: for every obligation of the listed pairs, finds a defender answer that
/// reproduces the attacker successor exactly (identity) or, failing that, the right side of a
/// listed pair whose left side equals the attacker successor.
pub fn fill_responses(
    a: &Automaton,
    semantics: Semantics,
    pairs: &[(Dist, Dist)],
    comp: Option<&Composition>,
) -> Result<Certificate> {
    let game = Game::new(a, semantics, comp)?;
    let g = &game.graph;
    let mut cert = Certificate {
        semantics,
        pairs: pairs.iter().map(|(l, r)| (g.show_dist(l), g.show_dist(r))).collect(),
        splits: Vec::new(),
        responses: Vec::new(),
    };
    for (i, (l, r)) in pairs.iter().enumerate() {
        for (attack, defender) in game.attacks(l, r)? {
            for (vi, vertex) in attack.vertices.iter().enumerate() {
                let mut targets = vec![(vertex.clone(), Target::Identity)];
                for (j, (pl, pr)) in pairs.iter().enumerate() {
                    if pl == vertex && pl != pr {
                        targets.push((pr.clone(), Target::Pair(j)));
                    }
                }
                let mut answered = false;
                for (want, target) in targets {
                    if let Some(spec) = solve_defender(g, &defender, &want)? {
                        let step = match &attack.tag {
                            StepTag::Action(x) => StepSpec::Action(g.actions()[*x].clone()),
                            StepTag::ActionSet(xs) => StepSpec::ActionSet(xs.iter().map(|&x| g.actions()[x].clone()).collect()),
                        };
                        cert.responses.push(Response {
                            pair: i,
                            step,
                            vertex: vi,
                            defender: spec,
                            decompose: vec![(Rational::one(), target)],
                        });
                        answered = true;
                        break;
                    }
                }
                if !answered {
                    return Err(Error::Rejected(format!(
                        "pair {i}, step {}, vertex {vi}: no defender answer found",
                        attack.tag.display(g)
                    )));
                }
            }
        }
    }
    Ok(cert)
}

fn solve_defender(g: &Automaton, defender: &Defender, want: &Dist) -> Result<Option<DefenderSpec>> {
    let n = g.num_states();
    let cols: Vec<(usize, usize, Rational, &Dist)> = match defender {
        Defender::Blocked => return Ok(None),
        Defender::Parts(parts) => parts
            .iter()
            .enumerate()
            .flat_map(|(pi, p)| p.choices.iter().enumerate().map(move |(k, c)| (pi, k, p.weight.clone(), c)))
            .collect(),
        Defender::Hull(points) => points.iter().enumerate().map(|(k, c)| (0, k, Rational::one(), c)).collect(),
    };
    let groups = match defender {
        Defender::Parts(parts) => parts.len(),
        _ => 1,
    };
    let mut constraints = Vec::new();
    for grp in 0..groups {
        let coeffs = cols.iter().map(|c| if c.0 == grp { Rational::one() } else { Rational::zero() }).collect();
        constraints.push(Constraint::new(coeffs, Relation::Eq, Rational::one()));
    }
    for s in 0..n {
        let coeffs = cols.iter().map(|(_, _, w, c)| w * c.get(s)).collect();
        constraints.push(Constraint::new(coeffs, Relation::Eq, want.get(s)));
    }
    let lp = LinearProgram { num_vars: cols.len(), objective: vec![Rational::zero(); cols.len()], sense: Sense::Minimize, constraints };
    let LpOutcome::Optimal { point, .. } = lp_solve(&lp)? else { return Ok(None) };
    Ok(Some(match defender {
        Defender::Parts(parts) => DefenderSpec::Parts(
            cols.iter()
                .zip(&point)
                .filter(|(_, x)| !x.is_zero())
                .filter(|((pi, ..), _)| parts[*pi].choices.len() > 1)
                .map(|((pi, k, ..), x)| (g.state_names()[parts[*pi].state].clone(), x.clone(), *k))
                .collect(),
        ),
        _ => DefenderSpec::Hull(cols.iter().zip(&point).filter(|(_, x)| !x.is_zero()).map(|((_, k, ..), x)| (x.clone(), *k)).collect()),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::corpus::{fixture, CERT_JAN_LATE_DAGGER, CERT_NON_COMP_DISTRIBUTED, CERT_SIM_COARSER_PLAIN};

    #[test]
    fn corpus_certificates_accept() {
        let f = fixture("sim-coarser").unwrap();
        let c = parse_certificate(CERT_SIM_COARSER_PLAIN).unwrap();
        assert!(check_certificate(&f.automaton, &c, &f.mu, &f.nu, None).unwrap().accepted());
        let f = fixture("jan-late").unwrap();
        let c = parse_certificate(CERT_JAN_LATE_DAGGER).unwrap();
        assert!(check_certificate(&f.automaton, &c, &f.mu, &f.nu, None).unwrap().accepted());
        let f = fixture("non-comp").unwrap();
        let cp = f.composed.unwrap();
        let c = parse_certificate(CERT_NON_COMP_DISTRIBUTED).unwrap();
        assert!(check_certificate(&cp.composition.automaton, &c, &cp.mu, &cp.nu, Some(&cp.composition)).unwrap().accepted());
    }

    #[test]
    fn round_trip() {
        let c = parse_certificate(CERT_SIM_COARSER_PLAIN).unwrap();
        assert_eq!(parse_certificate(&render_certificate(&c)).unwrap(), c);
    }

    #[test]
    fn identity_certificate() {
        let f = fixture("trace-jan").unwrap();
        let c = fill_responses(&f.automaton, Semantics::Plain, &[(f.mu.clone(), f.mu.clone())], None).unwrap();
        assert!(check_certificate(&f.automaton, &c, &f.mu, &f.mu, None).unwrap().accepted());
    }

    #[test]
    fn wrong_semantics_rejects() {
        // the plain certificate for sim-coarser fails as a late certificate
        let f = fixture("sim-coarser").unwrap();
        let mut c = parse_certificate(CERT_SIM_COARSER_PLAIN).unwrap();
        c.semantics = Semantics::Late;
        assert!(!check_certificate(&f.automaton, &c, &f.mu, &f.nu, None).unwrap().accepted());
        c.semantics = Semantics::Dagger;
        assert!(!check_certificate(&f.automaton, &c, &f.mu, &f.nu, None).unwrap().accepted());
    }

    #[test]
    fn tampering_rejects() {
        let f = fixture("sim-coarser").unwrap();
        let text = CERT_SIM_COARSER_PLAIN.replace("respond 0 a 1 : defender { t2: 1@0 }", "respond 0 a 1 : defender { t2: 1@1 }");
        let c = parse_certificate(&text).unwrap();
        match check_certificate(&f.automaton, &c, &f.mu, &f.nu, None).unwrap() {
            CertVerdict::Rejected(m) => assert!(m.contains("pair 0, step a, vertex 1"), "{m}"),
            v => panic!("{v:?}"),
        }
        let missing: String = CERT_SIM_COARSER_PLAIN.lines().filter(|l| !l.starts_with("respond 1 b")).map(|l| format!("{l}\n")).collect();
        let c = parse_certificate(&missing).unwrap();
        assert!(!check_certificate(&f.automaton, &c, &f.mu, &f.nu, None).unwrap().accepted());
        let half = CERT_SIM_COARSER_PLAIN.replace("respond 0 b 0 : defender { } decompose { 1 * id }", "respond 0 b 0 : defender { } decompose { 1/2 * id }");
        let c = parse_certificate(&half).unwrap();
        assert!(!check_certificate(&f.automaton, &c, &f.mu, &f.nu, None).unwrap().accepted());
    }

    #[test]
    fn parse_errors_carry_lines() {
        assert!(matches!(parse_certificate("semantics plain\npair 0 oops"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_certificate("semantics fancy"), Err(Error::Parse { line: 1, .. })));
        assert!(parse_certificate("pair 0: x:1 ; y:1").is_err());
    }
}
