//! Command-line front end. `run` parses arguments, dispatches to the library and renders a
//! report in human or `key: value` form.
//!
//! Exit codes: 0 when a verdict was computed, 1 when the verdict is negative (refuted, not
//! equivalent, rejected certificate), 2 on usage, parse or resource errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::Zero;

use crate::automata::{classify, compose, extend, parse_model, serialize_model, Automaton, Composition, Dist};
use crate::bisimulation::{
    check_certificate, dist_bisim_det, dist_bisim_refute, parse_certificate, prob_bisim, CertVerdict, RefuteOutcome,
    Semantics,
};
use crate::error::{Error, Result};
use crate::generators::{corpus, exam1, fixture, gen_clique, gen_emptiness_gadget, gen_random, parse_graph, RandomParams};
use crate::logic::{distance_lb, eval, parse_formula};
use crate::metrics::{d_ap, df_bounds, df_det, lift_metric, state_metric_df};
use crate::numerics::{parse_rational, Rational};
use crate::reactive::{equivalence_metric_dd, rabin_equiv};
use crate::traces::{
    best_word, max_word_prob, parse_word, prio_equiv_bounded, scheduler_count, trace_dist_equiv_bounded,
    trace_vector_text, word_text, PrioVerdict, TraceVerdict,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Kv,
}

#[derive(Debug, Parser)]
#[command(name = "pabisim", version, about = "Bisimulations, metrics and trace equivalences for probabilistic automata")]
pub struct Cli {
    /// output style
    #[arg(long, global = true, value_enum, default_value = "human")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct PairArgs {
    /// left distribution, e.g. `q:1` (defaults to the initial distribution)
    #[arg(long)]
    pub mu: Option<String>,
    /// right distribution
    #[arg(long)]
    pub nu: Option<String>,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    /// second component; the query then runs on the parallel composition
    #[arg(long = "with")]
    pub with: Option<PathBuf>,
    /// comma-separated synchronised actions
    #[arg(long, default_value = "")]
    pub sync: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Relation {
    Pbisim,
    /// exact decision on deterministic inputs, plain-semantics refutation otherwise
    #[value(alias = "plain")]
    Dist,
    Late,
    Dagger,
    Distributed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricKind {
    Df,
    Statedf,
    Dd,
    Dap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceKind {
    MaxWord,
    Prio,
    Tracedist,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogicKind {
    Eval,
    DistanceLb,
}

#[derive(Debug, Subcommand)]
pub enum GenKind {
    /// reactive automaton from a graph file (`vertices ...` / `edge u v`)
    Clique {
        graph: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// adds an absorbing unlabelled sink with self-loops on every action
    Gadget {
        model: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// seeded random automaton
    Random {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        states: usize,
        #[arg(long, default_value_t = 2)]
        actions: usize,
        #[arg(long, default_value_t = 2)]
        max_choices: usize,
        #[arg(long, default_value_t = 0.7)]
        density: f64,
        #[arg(long, default_value_t = 2)]
        label_classes: usize,
        #[arg(long, default_value_t = 3)]
        max_support: usize,
        #[arg(long)]
        deterministic: bool,
        #[arg(long)]
        labels_from_ea: bool,
        #[arg(long)]
        reactive: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// a built-in fixture; without a name, lists them
    Corpus {
        name: Option<String>,
        /// print the composed automaton of a compositional fixture
        #[arg(long)]
        composed: bool,
        /// exam1 perturbations
        #[arg(long, requires = "eps2")]
        eps1: Option<String>,
        #[arg(long, requires = "eps1")]
        eps2: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// decide, refute or certify a bisimulation between two distributions
    Check {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "dist")]
        rel: Relation,
        #[command(flatten)]
        pair: PairArgs,
        /// refutation depth
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// certificate file to check instead of searching
        #[arg(long)]
        cert: Option<PathBuf>,
        #[command(flatten)]
        comp: ComposeArgs,
    },
    /// check a certificate; the semantics and, by default, the pair come from the file
    CheckCert {
        model: PathBuf,
        cert: PathBuf,
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        comp: ComposeArgs,
    },
    /// distances between distributions or states
    Metric {
        #[arg(value_enum)]
        kind: MetricKind,
        model: PathBuf,
        /// second automaton (for dd)
        other: Option<PathBuf>,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value = "1")]
        gamma: String,
        #[arg(long, default_value = "1/1000")]
        tol: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 1000)]
        max_iter: usize,
    },
    /// language equivalence of two reactive automata
    Equiv {
        /// only `rabin` is available
        #[arg(value_parser = ["rabin"])]
        kind: String,
        left: PathBuf,
        right: PathBuf,
    },
    /// word probabilities and trace comparisons
    Trace {
        #[arg(value_enum)]
        kind: TraceKind,
        model: PathBuf,
        #[command(flatten)]
        pair: PairArgs,
        /// a space- or comma-separated action word (max-word)
        #[arg(long)]
        word: Option<String>,
        #[arg(long, short = 'k', alias = "maxlen", default_value_t = 3)]
        k: usize,
    },
    /// modal formulas: values and distinguishing lower bounds
    Logic {
        #[arg(value_enum)]
        kind: LogicKind,
        model: PathBuf,
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        formula: Option<String>,
        #[arg(long, default_value = "1")]
        gamma: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// parallel composition
    Compose {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, default_value = "")]
        sync: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// generators
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// input-enabled, deterministic and reactive flags
    Classify { model: PathBuf },
    /// input-enabled extension with a dead state
    Extend {
        model: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// re-evaluate a word witness on one or two distributions
    VerifyWord {
        model: PathBuf,
        #[arg(long)]
        word: String,
        #[command(flatten)]
        pair: PairArgs,
    },
}

/// Rendered outcome of one command.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub code: i32,
    pub headline: String,
    pub fields: Vec<(String, String)>,
    pub detail: Vec<String>,
}

impl Report {
    fn new(verdict: &str, headline: impl Into<String>) -> Self {
        Report { code: 0, headline: headline.into(), fields: vec![("verdict".into(), verdict.into())], detail: Vec::new() }
    }
    fn negative(mut self) -> Self {
        self.code = 1;
        self
    }
    fn field(mut self, k: &str, v: impl ToString) -> Self {
        self.fields.push((k.into(), v.to_string()));
        self
    }
    fn line(mut self, l: impl Into<String>) -> Self {
        self.detail.push(l.into());
        self
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Human => {
                out.push_str(&self.headline);
                out.push('\n');
                for l in &self.detail {
                    out.push_str(l);
                    out.push('\n');
                }
            }
            Format::Kv => {
                for (k, v) in &self.fields {
                    out.push_str(&format!("{k}: {}\n", v.replace('\n', " | ")));
                }
            }
        }
        out
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Rejected(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Automaton> {
    parse_model(&read(path)?).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse { line, message: format!("{}: {message}", path.display()) },
        other => other,
    })
}

fn rational(text: &str) -> Result<Rational> {
    Ok(parse_rational(text)?)
}

fn sync_list(text: &str) -> Vec<&str> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn dists(a: &Automaton, p: &PairArgs, need_nu: bool) -> Result<(Dist, Option<Dist>)> {
    let mu = match &p.mu {
        Some(t) => a.parse_dist(t)?,
        None => a.initial().clone(),
    };
    let nu = p.nu.as_deref().map(|t| a.parse_dist(t)).transpose()?;
    if need_nu && nu.is_none() {
        return Err(Error::Rejected("--nu is required".into()));
    }
    Ok((mu, nu))
}

fn emit_model(a: &Automaton, output: &Option<PathBuf>, verdict: &str) -> Result<Report> {
    let text = serialize_model(a);
    match output {
        Some(p) => {
            fs::write(p, &text).map_err(|e| Error::Rejected(format!("cannot write {}: {e}", p.display())))?;
            Ok(Report::new(verdict, format!("wrote {}", p.display())).field("path", p.display()))
        }
        None => {
            let mut r = Report::new(verdict, text.trim_end());
            r.fields.push(("model".into(), text.trim_end().to_string()));
            Ok(r)
        }
    }
}

/// The automaton a query runs on, with the composition when `--with` is given.
fn subject(model: &Path, comp: &ComposeArgs) -> Result<(Automaton, Option<Composition>)> {
    let left = load(model)?;
    match &comp.with {
        Some(p) => {
            let c = compose(&left, &load(p)?, &sync_list(&comp.sync))?;
            Ok((c.automaton.clone(), Some(c)))
        }
        None => Ok((left, None)),
    }
}

fn cert_report(a: &Automaton, cert_text: &str, mu: &Dist, nu: &Dist, comp: Option<&Composition>) -> Result<Report> {
    let cert = parse_certificate(cert_text)?;
    let sem = cert.semantics;
    Ok(match check_certificate(a, &cert, mu, nu, comp)? {
        CertVerdict::Accepted { pairs, obligations } => Report::new("accepted", format!("certificate accepted ({} semantics)", sem.name()))
            .field("semantics", sem.name())
            .field("pairs", pairs)
            .field("obligations", obligations)
            .line(format!("{pairs} pairs, {obligations} obligations checked")),
        CertVerdict::Rejected(why) => Report::new("rejected", format!("certificate rejected: {why}"))
            .field("semantics", sem.name())
            .field("reason", why)
            .negative(),
    })
}

fn refute_report(a: &Automaton, mu: &Dist, nu: &Dist, sem: Semantics, depth: usize, comp: Option<&Composition>) -> Result<Report> {
    let (out, names) = dist_bisim_refute(a, mu, nu, sem, depth, comp)?;
    Ok(match out {
        RefuteOutcome::Refuted(c) => {
            let tree = c.render(&names);
            let mut r = Report::new("refuted", format!("refuted at depth {} ({} semantics)", c.depth(), sem.name()))
                .field("semantics", sem.name())
                .field("depth", c.depth())
                .field("counterexample", tree.trim_end())
                .negative();
            r.detail.extend(tree.lines().map(String::from));
            r
        }
        RefuteOutcome::NoViolationUpTo(k) => Report::new(&format!("no-violation-up-to-{k}"), format!("no violation up to depth {k} ({} semantics)", sem.name()))
            .field("semantics", sem.name())
            .field("depth", k),
    })
}

fn check(model: &Path, rel: Relation, pair: &PairArgs, depth: usize, cert: &Option<PathBuf>, comp: &ComposeArgs) -> Result<Report> {
    let (a, c) = subject(model, comp)?;
    if rel == Relation::Pbisim {
        let p = prob_bisim(&a)?;
        let blocks = p.render(a.state_names());
        let mut r = Report::new("partition", blocks.clone()).field("blocks", &blocks).field("count", p.blocks.len());
        if let (Some(m), Some(n)) = (&pair.mu, &pair.nu) {
            let (s, t) = (
                a.state_id(m.split(':').next().unwrap_or(m)).ok_or_else(|| Error::Rejected(format!("--mu `{m}` must name a state")))?,
                a.state_id(n.split(':').next().unwrap_or(n)).ok_or_else(|| Error::Rejected(format!("--nu `{n}` must name a state")))?,
            );
            let same = p.same_block(s, t);
            r.fields[0].1 = if same { "same-block" } else { "separated" }.into();
            r = r.line(format!("{} and {} are {}", a.state_names()[s], a.state_names()[t], if same { "in one block" } else { "separated" }));
            if !same {
                r = r.negative();
            }
        }
        return Ok(r);
    }
    let (mu, nu) = dists(&a, pair, true)?;
    let nu = nu.expect("checked");
    let sem = match rel {
        Relation::Dist => Semantics::Plain,
        Relation::Late => Semantics::Late,
        Relation::Dagger => Semantics::Dagger,
        _ => Semantics::Distributed,
    };
    if sem == Semantics::Distributed && c.is_none() {
        return Err(Error::Rejected("distributed semantics needs --with <model> and --sync".into()));
    }
    if let Some(p) = cert {
        let text = read(p)?;
        if parse_certificate(&text)?.semantics != sem {
            return Err(Error::Rejected(format!("certificate is not for {} semantics", sem.name())));
        }
        return cert_report(&a, &text, &mu, &nu, c.as_ref());
    }
    if sem == Semantics::Plain {
        match dist_bisim_det(&a, &mu, &nu) {
            Ok(v) if v.bisimilar => {
                return Ok(Report::new("bisimilar", "bisimilar").field("method", "subspace").field("rank", v.basis.rank()));
            }
            Ok(v) => {
                let w = v.witness.unwrap_or_default();
                let ext = crate::automata::ensure_extended(&a)?.automaton;
                let class = v.class.map(|l| format!("{{{}}}", ext.label_names(&l).join(","))).unwrap_or_default();
                return Ok(Report::new("not-bisimilar", format!("not bisimilar: word `{}` separates class {class}", word_text(&a, &w)))
                    .field("method", "subspace")
                    .field("word", word_text(&a, &w))
                    .field("class", class)
                    .negative());
            }
            Err(Error::Nondeterministic(_)) => {}
            Err(e) => return Err(e),
        }
    }
    refute_report(&a, &mu, &nu, sem, depth, c.as_ref())
}

fn metric(kind: MetricKind, model: &Path, other: &Option<PathBuf>, pair: &PairArgs, gamma: &str, tol: &str, depth: usize, max_iter: usize) -> Result<Report> {
    let a = load(model)?;
    let (gamma, tol) = (rational(gamma)?, rational(tol)?);
    match kind {
        MetricKind::Dap => {
            let (mu, nu) = dists(&a, pair, true)?;
            let v = d_ap(&a, &mu, &nu.expect("checked"));
            Ok(Report::new("value", v.to_string()).field("value", v))
        }
        MetricKind::Df => {
            let (mu, nu) = dists(&a, pair, true)?;
            let nu = nu.expect("checked");
            match df_det(&a, &mu, &nu, &gamma, &tol) {
                Ok(r) => Ok(Report::new("value", format!("{} {}", r.value, r.status.name()))
                    .field("value", &r.value)
                    .field("status", r.status.name())
                    .field("upper", &r.upper)
                    .field("witness", word_text(&a, &r.witness))
                    .line(format!("upper bound {}", r.upper))
                    .line(format!("maximising word `{}`", word_text(&a, &r.witness)))),
                Err(Error::Nondeterministic(_)) => {
                    let b = df_bounds(&a, &mu, &nu, &gamma, depth)?;
                    let flag = if b.heuristic_upper { "heuristic-upper" } else { "sound" };
                    Ok(Report::new("bounds", format!("[{}, {}] {flag}", b.lower, b.upper))
                        .field("lower", &b.lower)
                        .field("upper", &b.upper)
                        .field("upper-kind", flag)
                        .field("lower-witness", &b.lower_witness)
                        .field("upper-witness", b.upper_witness.join(" "))
                        .line(format!("lower witness {}", b.lower_witness)))
                }
                Err(e) => Err(e),
            }
        }
        MetricKind::Statedf => {
            let t = state_metric_df(&a, &gamma, &tol, max_iter)?;
            let mut r = Report::new("table", format!("{} after {} iterations", t.status.name(), t.iterations))
                .field("status", t.status.name())
                .field("iterations", t.iterations);
            for s in 0..t.states.len() {
                for u in s + 1..t.states.len() {
                    let v = t.get(s, u);
                    r = r.field(&format!("d({},{})", t.states[s], t.states[u]), v);
                    if !v.is_zero() {
                        r = r.line(format!("d({}, {}) = {v}", t.states[s], t.states[u]));
                    }
                }
            }
            if let (Some(_), Some(_)) = (&pair.mu, &pair.nu) {
                let (mu, nu) = dists(&a, pair, true)?;
                let lifted = lift_metric(&t, &mu, &nu.expect("checked"))?;
                r = r.field("lifted", &lifted).line(format!("lifted distance {lifted}"));
            }
            Ok(r)
        }
        MetricKind::Dd => {
            let other = other.as_ref().ok_or_else(|| Error::Rejected("dd needs a second automaton".into()))?;
            let b = load(other)?;
            let m = equivalence_metric_dd(&a, &b, &gamma, &tol, depth)?;
            Ok(Report::new("value", format!("{} {}", m.value, m.status.name()))
                .field("value", &m.value)
                .field("status", m.status.name())
                .field("witness", word_text(&a, &m.witness)))
        }
    }
}

fn trace(kind: TraceKind, model: &Path, pair: &PairArgs, word: &Option<String>, k: usize) -> Result<Report> {
    let a = load(model)?;
    match kind {
        TraceKind::MaxWord => {
            let (mu, _) = dists(&a, pair, false)?;
            match word {
                Some(w) => {
                    let w = parse_word(&a, w)?;
                    let v = max_word_prob(&a, &mu, &w)?;
                    Ok(Report::new("value", v.to_string()).field("value", v).field("word", word_text(&a, &w)))
                }
                None => {
                    let (v, w) = best_word(&a, &mu, k)?;
                    Ok(Report::new("value", format!("{v} via `{}`", word_text(&a, &w))).field("value", v).field("word", word_text(&a, &w)))
                }
            }
        }
        TraceKind::Prio => {
            let (mu, nu) = dists(&a, pair, true)?;
            Ok(match prio_equiv_bounded(&a, &mu, &nu.expect("checked"), k)? {
                PrioVerdict::EqualUpTo(k) => Report::new(&format!("equal-up-to-{k}"), format!("equal on all words up to length {k}")),
                PrioVerdict::Witness { word, left, right } => {
                    Report::new("witness", format!("word `{}` gives {left} against {right}", word_text(&a, &word)))
                        .field("word", word_text(&a, &word))
                        .field("left", left)
                        .field("right", right)
                        .negative()
                }
            })
        }
        TraceKind::Tracedist => {
            let (mu, nu) = dists(&a, pair, true)?;
            let nu = nu.expect("checked");
            let counts = (scheduler_count(&a, &mu, k), scheduler_count(&a, &nu, k));
            Ok(match trace_dist_equiv_bounded(&a, &mu, &nu, k)? {
                TraceVerdict::EqualUpTo(k) => Report::new(&format!("equal-up-to-{k}"), format!("trace distributions equal up to length {k}"))
                    .field("schedulers", format!("{} {}", counts.0, counts.1)),
                TraceVerdict::Witness { side, vector } => {
                    let text = trace_vector_text(&a, &vector);
                    let side = format!("{side:?}").to_lowercase();
                    Report::new("witness", format!("a {side} scheduler yields {text}, outside the other side's hull"))
                        .field("side", side)
                        .field("traces", text)
                        .field("schedulers", format!("{} {}", counts.0, counts.1))
                        .negative()
                }
            })
        }
    }
}

fn logic(kind: LogicKind, model: &Path, pair: &PairArgs, formula: &Option<String>, gamma: &str, depth: usize) -> Result<Report> {
    let a = load(model)?;
    let gamma = rational(gamma)?;
    match kind {
        LogicKind::Eval => {
            let f = parse_formula(formula.as_deref().ok_or_else(|| Error::Rejected("--formula is required".into()))?)?;
            let (mu, nu) = dists(&a, pair, false)?;
            let v = eval(&a, &f, &mu, &gamma)?;
            let mut r = Report::new("value", v.to_string()).field("formula", &f).field("value", &v);
            if let Some(nu) = nu {
                let w = eval(&a, &f, &nu, &gamma)?;
                r.headline = format!("{v} against {w}");
                r = r.field("right", w);
            }
            Ok(r)
        }
        LogicKind::DistanceLb => {
            let (mu, nu) = dists(&a, pair, true)?;
            let (v, f) = distance_lb(&a, &mu, &nu.expect("checked"), &gamma, depth)?;
            Ok(Report::new("value", format!("{v} via {f}")).field("value", v).field("witness", f))
        }
    }
}

fn gen(kind: &GenKind) -> Result<Report> {
    match kind {
        GenKind::Clique { graph, output } => emit_model(&gen_clique(&parse_graph(&read(graph)?)?)?, output, "model"),
        GenKind::Gadget { model, output } => emit_model(&gen_emptiness_gadget(&load(model)?)?.0, output, "model"),
        GenKind::Random {
            seed,
            states,
            actions,
            max_choices,
            density,
            label_classes,
            max_support,
            deterministic,
            labels_from_ea,
            reactive,
            output,
        } => {
            let p = RandomParams {
                n_states: *states,
                n_actions: *actions,
                max_choices: *max_choices,
                density: *density,
                label_classes: *label_classes,
                deterministic: *deterministic,
                labels_from_ea: *labels_from_ea,
                reactive: *reactive,
                max_support: *max_support,
            };
            emit_model(&gen_random(&p, *seed)?, output, "model")
        }
        GenKind::Corpus { name: None, .. } => {
            let all = corpus()?;
            let names: Vec<&str> = all.iter().map(|f| f.name).collect();
            let mut r = Report::new("list", names.join(" ")).field("fixtures", names.join(" "));
            for f in &all {
                r = r.line(format!("{}: mu {} nu {} ({})", f.name, f.automaton.show_dist(&f.mu), f.automaton.show_dist(&f.nu), f.notes));
            }
            Ok(r)
        }
        GenKind::Corpus { name: Some(name), composed, eps1, eps2, output } => {
            let mut f = fixture(name)?;
            if let (Some(e1), Some(e2)) = (eps1, eps2) {
                if name != "exam1" {
                    return Err(Error::Rejected("--eps1/--eps2 apply to exam1 only".into()));
                }
                f.automaton = exam1(&rational(e1)?, &rational(e2)?)?;
            }
            let (a, mu, nu) = if *composed {
                let c = f.composed.ok_or_else(|| Error::Rejected(format!("fixture `{name}` has no composition")))?;
                (c.composition.automaton, c.mu, c.nu)
            } else {
                (f.automaton, f.mu, f.nu)
            };
            let mut r = emit_model(&a, output, "model")?;
            r.fields.push(("mu".into(), a.show_dist(&mu)));
            r.fields.push(("nu".into(), a.show_dist(&nu)));
            if output.is_some() {
                r = r.line(format!("mu {}", a.show_dist(&mu))).line(format!("nu {}", a.show_dist(&nu)));
            }
            Ok(r)
        }
    }
}

fn dispatch(cmd: &Command) -> Result<Report> {
    match cmd {
        Command::Check { model, rel, pair, depth, cert, comp } => check(model, *rel, pair, *depth, cert, comp),
        Command::CheckCert { model, cert, pair, comp } => {
            let (a, c) = subject(model, comp)?;
            let text = read(cert)?;
            // without --mu/--nu the certificate's first pair is the claim
            let first = parse_certificate(&text)?.pairs.into_iter().next();
            let pair = PairArgs {
                mu: pair.mu.clone().or_else(|| first.as_ref().map(|p| p.0.clone())),
                nu: pair.nu.clone().or_else(|| first.map(|p| p.1)),
            };
            let (mu, nu) = dists(&a, &pair, true)?;
            cert_report(&a, &text, &mu, &nu.expect("checked"), c.as_ref())
        }
        Command::Metric { kind, model, other, pair, gamma, tol, depth, max_iter } => {
            metric(*kind, model, other, pair, gamma, tol, *depth, *max_iter)
        }
        Command::Equiv { left, right, .. } => {
            let (a, b) = (load(left)?, load(right)?);
            let v = rabin_equiv(&a, &b)?;
            Ok(if v.equivalent {
                Report::new("equivalent", "equivalent").field("rank", v.basis.rank())
            } else {
                let w = word_text(&a, &v.witness.unwrap_or_default());
                Report::new("not-equivalent", format!("not equivalent: word `{w}` is accepted with different probabilities"))
                    .field("word", w)
                    .negative()
            })
        }
        Command::Trace { kind, model, pair, word, k } => trace(*kind, model, pair, word, *k),
        Command::Logic { kind, model, pair, formula, gamma, depth } => logic(*kind, model, pair, formula, gamma, *depth),
        Command::Compose { left, right, sync, output } => {
            let c = compose(&load(left)?, &load(right)?, &sync_list(sync))?;
            emit_model(&c.automaton, output, "model")
        }
        Command::Gen { kind } => gen(kind),
        Command::Classify { model } => {
            let a = load(model)?;
            let c = classify(&a);
            let kind = if c.reactive {
                "reactive"
            } else if c.deterministic {
                "deterministic"
            } else {
                "nondeterministic"
            };
            Ok(Report::new(kind, kind)
                .field("input-enabled", c.input_enabled)
                .field("deterministic", c.deterministic)
                .field("reactive", c.reactive)
                .line(format!("input-enabled {}, deterministic {}, reactive {}", c.input_enabled, c.deterministic, c.reactive)))
        }
        Command::Extend { model, output } => emit_model(&extend(&load(model)?)?.automaton, output, "model"),
        Command::VerifyWord { model, word, pair } => {
            let a = load(model)?;
            let w = parse_word(&a, word)?;
            let (mu, nu) = dists(&a, pair, false)?;
            let l = max_word_prob(&a, &mu, &w)?;
            match nu {
                None => Ok(Report::new("value", l.to_string()).field("value", l)),
                Some(nu) => {
                    let r = max_word_prob(&a, &nu, &w)?;
                    let differs = l != r;
                    let rep = Report::new(if differs { "distinguishes" } else { "agrees" }, format!("{l} against {r}"))
                        .field("left", &l)
                        .field("right", &r)
                        .field("gap", crate::numerics::abs(&(l.clone() - r.clone())));
                    Ok(if differs { rep } else { rep.negative() })
                }
            }
        }
    }
}

fn module_of(cmd: &Command) -> &'static str {
    match cmd {
        Command::Check { .. } | Command::CheckCert { .. } => "bisimulation",
        Command::Metric { .. } => "metrics",
        Command::Equiv { .. } => "reactive",
        Command::Trace { .. } | Command::VerifyWord { .. } => "traces",
        Command::Logic { .. } => "logic",
        Command::Compose { .. } | Command::Classify { .. } | Command::Extend { .. } => "automata",
        Command::Gen { .. } => "generators",
    }
}

/// Runs one command line. Output goes to `out`, error messages to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(&cli.command) {
        Ok(r) => {
            let _ = out.write_all(r.render(cli.format).as_bytes());
            r.code
        }
        Err(e) => {
            let _ = writeln!(err, "error [{}]: {e}", module_of(&cli.command));
            2
        }
    }
}

/// Convenience for tests: runs and captures stdout and stderr.
pub fn run_captured<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(args, &mut out, &mut err);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&err).into_owned())
}
