//! Line-oriented model text format.

use std::fmt::Write;

use super::dist::{Dist, StateId};
use super::model::{Automaton, AutomatonBuilder};
use crate::error::{Error, Result};
use crate::numerics::parse_rational;

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Parses `id:p(,id:p)*`; `line` is used for error positions.
pub fn parse_dist_literal(text: &str, line: usize, lookup: impl Fn(&str) -> Option<StateId>) -> Result<Dist> {
    let mut d = Dist::empty();
    let mut seen = Vec::new();
    for entry in text.split(',') {
        let entry = entry.trim();
        let (name, p) = entry
            .rsplit_once(':')
            .ok_or_else(|| err(line, format!("expected `state:probability`, found `{entry}`")))?;
        let name = name.trim();
        let s = lookup(name).ok_or_else(|| err(line, format!("unknown state `{name}`")))?;
        if seen.contains(&s) {
            return Err(err(line, format!("state `{name}` listed twice")));
        }
        seen.push(s);
        let p = parse_rational(p).map_err(|e| err(line, e.to_string()))?;
        if p <= crate::numerics::zero() {
            return Err(err(line, format!("probability of `{name}` must be positive")));
        }
        d.add(s, &p);
    }
    Ok(d)
}

pub fn parse_model(text: &str) -> Result<Automaton> {
    let mut b: Option<AutomatonBuilder> = None;
    let mut have_actions = false;
    let mut have_init = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (kw, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        let rest = rest.trim();
        if kw == "automaton" {
            if b.is_some() {
                return Err(err(line, "second `automaton` header"));
            }
            let name = rest.split_whitespace().collect::<Vec<_>>();
            if name.len() != 1 {
                return Err(err(line, "expected `automaton <name>`"));
            }
            b = Some(AutomatonBuilder::new(name[0]));
            continue;
        }
        let b = b.as_mut().ok_or_else(|| err(line, "model must start with `automaton <name>`"))?;
        let wrap = |e: Error| match e {
            Error::InvalidModel(m) => err(line, m),
            other => other,
        };
        match kw {
            "ap" => {
                let ids: Vec<&str> = rest.split_whitespace().collect();
                b.ap(&ids).map_err(wrap)?;
            }
            "actions" => {
                let ids: Vec<&str> = rest.split_whitespace().collect();
                if ids.is_empty() {
                    return Err(err(line, "`actions` needs at least one action"));
                }
                b.actions(&ids).map_err(wrap)?;
                have_actions = true;
            }
            "option" => match rest {
                "labels-from-ea" => {
                    b.labels_from_ea(true);
                }
                other => return Err(err(line, format!("unknown option `{other}`"))),
            },
            "state" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                let (name, label) = match toks.as_slice() {
                    [name] => (*name, &[][..]),
                    [name, "label", props @ ..] => (*name, props),
                    _ => return Err(err(line, "expected `state <id> [label <id>*]`")),
                };
                b.add_state(name, label).map_err(wrap)?;
            }
            "init" => {
                if have_init {
                    return Err(err(line, "second `init` line"));
                }
                let d = parse_dist_literal(rest, line, |n| b.state_id(n))?;
                if !d.is_probability() {
                    return Err(err(line, format!("initial mass is {}, expected 1", d.mass())));
                }
                b.initial(d);
                have_init = true;
            }
            "trans" => {
                if !have_actions {
                    return Err(err(line, "`actions` must precede transitions"));
                }
                let (head, target) = rest
                    .split_once("->")
                    .ok_or_else(|| err(line, "expected `trans <src> <act> -> <dist>`"))?;
                let head: Vec<&str> = head.split_whitespace().collect();
                let [src, act] = head.as_slice() else {
                    return Err(err(line, "expected `trans <src> <act> -> <dist>`"));
                };
                let s = b.state_id(src).ok_or_else(|| err(line, format!("unknown state `{src}`")))?;
                let a = b.action_id(act).ok_or_else(|| err(line, format!("unknown action `{act}`")))?;
                let d = parse_dist_literal(target, line, |n| b.state_id(n))?;
                if !d.is_probability() {
                    return Err(err(line, format!("transition mass is {}, expected 1", d.mass())));
                }
                b.add_transition(s, a, d);
            }
            other => return Err(err(line, format!("unknown directive `{other}`"))),
        }
    }
    let b = b.ok_or_else(|| err(1, "empty model"))?;
    if !have_actions {
        return Err(err(text.lines().count().max(1), "missing `actions` line"));
    }
    b.build().map_err(|e| match e {
        Error::InvalidModel(m) => err(text.lines().count().max(1), m),
        other => other,
    })
}

pub fn serialize_model(a: &Automaton) -> String {
    let mut out = String::new();
    let names = a.state_names();
    writeln!(out, "automaton {}", a.name()).unwrap();
    if !a.labels_from_ea() {
        if a.ap().is_empty() {
            writeln!(out, "ap").unwrap();
        } else {
            writeln!(out, "ap {}", a.ap().join(" ")).unwrap();
        }
    }
    writeln!(out, "actions {}", a.actions().join(" ")).unwrap();
    if a.labels_from_ea() {
        writeln!(out, "option labels-from-ea").unwrap();
    }
    for (s, name) in names.iter().enumerate() {
        let l = a.label(s);
        if a.labels_from_ea() || l.is_empty() {
            writeln!(out, "state {name}").unwrap();
        } else {
            writeln!(out, "state {} label {}", name, a.label_names(l).join(" ")).unwrap();
        }
    }
    writeln!(out, "init {}", a.show_dist(a.initial())).unwrap();
    for t in a.transitions() {
        writeln!(
            out,
            "trans {} {} -> {}",
            names[t.source],
            a.actions()[t.action],
            a.show_dist(&t.target)
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = "automaton two\nap p\nactions a\nstate x label p\nstate y\ninit x:1\ntrans x a -> x:1/2,y:1/2\n";

    #[test]
    fn parses_and_round_trips() {
        let a = parse_model(TWO).unwrap();
        assert_eq!(a.num_states(), 2);
        assert_eq!(serialize_model(&a), TWO);
        assert_eq!(parse_model(&serialize_model(&a)).unwrap(), a);
    }

    #[test]
    fn mass_error_carries_line() {
        let bad = TWO.replace("y:1/2", "y:1/4");
        match parse_model(&bad) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 7);
                assert!(message.contains("3/4"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reported_errors() {
        let cases = [
            (TWO.replace("trans x a", "trans z a"), 7, "unknown state"),
            (TWO.replace("trans x a", "trans x b"), 7, "unknown action"),
            (TWO.replace("state y", "state x"), 5, "duplicate state"),
            (TWO.replace("y:1/2", "y:1/x"), 7, "malformed rational"),
        ];
        for (text, want_line, want) in cases {
            match parse_model(&text) {
                Err(Error::Parse { line, message }) => {
                    assert_eq!(line, want_line, "{message}");
                    assert!(message.contains(want), "{message}");
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn comments_and_label_option() {
        let text = "# header\nautomaton e # trailing\nactions a b\noption labels-from-ea\nstate p\nstate q\ninit p:1\ntrans p a -> q:1\n";
        let a = parse_model(text).unwrap();
        assert_eq!(a.ap(), ["a", "b"]);
        assert_eq!(a.label_names(a.label(0)), ["a"]);
        assert!(a.label(1).is_empty());
        assert_eq!(parse_model(&serialize_model(&a)).unwrap(), a);
    }
}
