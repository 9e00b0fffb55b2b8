use pyo3::ffi::c_str;
use pyo3::prelude::*;

fn with_module(code: &std::ffi::CStr) {
    use pabisim_py::pabisim_py;
    pyo3::append_to_inittab!(pabisim_py);
    Python::initialize();
    Python::attach(|py| {
        if let Err(e) = py.run(code, None, None) {
            e.print(py);
            panic!("python check failed");
        }
    });
}

#[test]
fn fixtures_metrics_and_errors() {
    with_module(c_str!(
        r#"
from fractions import Fraction
import pabisim_py as pb

exam, _, _ = pb.fixture("exam1")
assert pb.check(exam, "q:1", "q':1")[0] == "not-bisimilar"
d = pb.distance(exam, "q:1", "q':1")
assert Fraction(d["value"]) == Fraction(1, 20) and d["status"] == "exact-fixpoint", d
states, rows, status = pb.state_metric(exam)
assert status == "exact-fixpoint"
assert Fraction(rows[states.index("r1")][states.index("r'")]) == Fraction(11, 30)

jan, mu, nu = pb.fixture("jan-late")
assert pb.check(jan, mu, nu, rel="late", depth=1)[0] == "refuted"
assert pb.check(jan, mu, nu, rel="dagger", depth=3)[0] == "no-violation"

try:
    pb.check(jan, mu, nu, rel="distributed")
    raise AssertionError("distributed accepted without a composition")
except pb.PabisimError:
    pass

code, out, err = pb.run_cli(["metric", "dap", "--help"])
assert code == 0 and "gamma" in out, (code, out, err)
"#
    ));
}
