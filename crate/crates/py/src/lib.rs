//! Python bindings. Rationals cross the boundary as strings such as `"1/20"`, which
//! `fractions.Fraction` parses directly; library errors raise `PabisimError`.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use pabisim::automata::{classify, parse_model, serialize_model, Automaton, Dist};
use pabisim::bisimulation::{dist_bisim_det, dist_bisim_refute, RefuteOutcome, Semantics};
use pabisim::generators::fixture as corpus_fixture;
use pabisim::metrics::{df_bounds, df_det, state_metric_df};
use pabisim::numerics::parse_rational;
use pabisim::reactive::rabin_equiv;
use pabisim::traces::{best_word as search_best_word, word_text};

create_exception!(pabisim_py, PabisimError, PyException);

fn py_err(e: pabisim::Error) -> PyErr {
    PabisimError::new_err(e.to_string())
}

fn rational(text: &str) -> PyResult<pabisim::numerics::Rational> {
    parse_rational(text).map_err(|e| py_err(e.into()))
}

/// A parsed probabilistic automaton.
#[pyclass(frozen, module = "pabisim_py")]
pub struct Model {
    inner: Automaton,
}

impl Model {
    fn dist(&self, text: Option<&str>) -> PyResult<Dist> {
        match text {
            Some(t) => self.inner.parse_dist(t).map_err(py_err),
            None => Ok(self.inner.initial().clone()),
        }
    }
}

#[pymethods]
impl Model {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Model { inner: parse_model(text).map_err(py_err)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn states(&self) -> Vec<String> {
        self.inner.state_names().to_vec()
    }

    #[getter]
    fn actions(&self) -> Vec<String> {
        self.inner.actions().to_vec()
    }

    #[getter]
    fn initial(&self) -> String {
        self.inner.show_dist(self.inner.initial())
    }

    fn to_text(&self) -> String {
        serialize_model(&self.inner)
    }

    /// `(input_enabled, deterministic, reactive)`
    fn classify(&self) -> (bool, bool, bool) {
        let c = classify(&self.inner);
        (c.input_enabled, c.deterministic, c.reactive)
    }

    fn __repr__(&self) -> String {
        format!("Model({:?}, states={}, actions={})", self.inner.name(), self.inner.num_states(), self.inner.num_actions())
    }
}

/// Built-in fixture: `(model, mu, nu)` with the distributions as text.
#[pyfunction]
fn fixture(name: &str) -> PyResult<(Model, String, String)> {
    let f = corpus_fixture(name).map_err(py_err)?;
    let (mu, nu) = (f.automaton.show_dist(&f.mu), f.automaton.show_dist(&f.nu));
    Ok((Model { inner: f.automaton }, mu, nu))
}

/// Decides (`dist`) or refutes up to `depth` (`plain`, `late`, `dagger`) distribution
/// bisimilarity. Returns `(verdict, detail)`; verdicts are `bisimilar`, `not-bisimilar`,
/// `refuted` and `no-violation`.
#[pyfunction]
#[pyo3(signature = (model, mu=None, nu=None, rel="dist", depth=4))]
fn check(model: &Model, mu: Option<&str>, nu: Option<&str>, rel: &str, depth: usize) -> PyResult<(String, String)> {
    let a = &model.inner;
    let (mu, nu) = (model.dist(mu)?, model.dist(nu)?);
    if rel == "dist" {
        let v = dist_bisim_det(a, &mu, &nu).map_err(py_err)?;
        let detail = v.witness.map(|w| format!("masses differ after `{}`", word_text(a, &w))).unwrap_or_default();
        return Ok((if v.bisimilar { "bisimilar" } else { "not-bisimilar" }.into(), detail));
    }
    let sem: Semantics = rel.parse().map_err(py_err)?;
    if sem == Semantics::Distributed {
        return Err(PabisimError::new_err("distributed checks need a composition; use run_cli with `check --with`"));
    }
    let (out, names) = dist_bisim_refute(a, &mu, &nu, sem, depth, None).map_err(py_err)?;
    Ok(match out {
        RefuteOutcome::Refuted(c) => ("refuted".into(), c.render(&names)),
        RefuteOutcome::NoViolationUpTo(d) => ("no-violation".into(), format!("no violation up to depth {d}")),
    })
}

/// Discounted distribution distance. Deterministic automata give a value with status;
/// otherwise a `[lower, upper]` bracket whose status is `bracket` or `heuristic-bracket`.
/// Returns `{"value", "upper", "status"}`.
#[pyfunction]
#[pyo3(signature = (model, mu=None, nu=None, gamma="1", tol="1/1000", depth=6))]
fn distance(
    model: &Model,
    mu: Option<&str>,
    nu: Option<&str>,
    gamma: &str,
    tol: &str,
    depth: usize,
) -> PyResult<std::collections::BTreeMap<&'static str, String>> {
    let a = &model.inner;
    let (mu, nu) = (model.dist(mu)?, model.dist(nu)?);
    let (gamma, tol) = (rational(gamma)?, rational(tol)?);
    let mut out = std::collections::BTreeMap::new();
    match df_det(a, &mu, &nu, &gamma, &tol) {
        Ok(r) => {
            out.insert("value", r.value.to_string());
            out.insert("upper", r.upper.to_string());
            out.insert("status", r.status.name().to_string());
        }
        Err(pabisim::Error::Nondeterministic(_)) => {
            let b = df_bounds(a, &mu, &nu, &gamma, depth).map_err(py_err)?;
            out.insert("value", b.lower.to_string());
            out.insert("upper", b.upper.to_string());
            out.insert("status", if b.heuristic_upper { "heuristic-bracket" } else { "bracket" }.to_string());
        }
        Err(e) => return Err(py_err(e)),
    }
    Ok(out)
}

/// State metric table: `(states, rows of rational strings, status)`.
#[pyfunction]
#[pyo3(signature = (model, gamma="1", tol="1/1000", max_iter=1000))]
fn state_metric(model: &Model, gamma: &str, tol: &str, max_iter: usize) -> PyResult<(Vec<String>, Vec<Vec<String>>, String)> {
    let t = state_metric_df(&model.inner, &rational(gamma)?, &rational(tol)?, max_iter).map_err(py_err)?;
    let rows = t.values.iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect();
    Ok((t.states, rows, t.status.name().to_string()))
}

/// Most probable word of length at most `maxlen`: `(probability, word)`.
#[pyfunction]
#[pyo3(signature = (model, mu=None, maxlen=3))]
fn best_word(model: &Model, mu: Option<&str>, maxlen: usize) -> PyResult<(String, String)> {
    let (p, w) = search_best_word(&model.inner, &model.dist(mu)?, maxlen).map_err(py_err)?;
    Ok((p.to_string(), word_text(&model.inner, &w)))
}

/// Language equivalence of two reactive automata: `(equivalent, shortest distinguishing word)`.
#[pyfunction]
fn language_equivalent(left: &Model, right: &Model) -> PyResult<(bool, Option<String>)> {
    let v = rabin_equiv(&left.inner, &right.inner).map_err(py_err)?;
    Ok((v.equivalent, v.witness.map(|w| word_text(&left.inner, &w))))
}

/// Runs the command-line front end in-process: `(exit_code, stdout, stderr)`.
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String, String) {
    pabisim::cli::run_captured(std::iter::once("pabisim".to_string()).chain(args))
}

#[pymodule]
pub fn pabisim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PabisimError", m.py().get_type::<PabisimError>())?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(fixture, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(state_metric, m)?)?;
    m.add_function(wrap_pyfunction!(best_word, m)?)?;
    m.add_function(wrap_pyfunction!(language_equivalent, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
