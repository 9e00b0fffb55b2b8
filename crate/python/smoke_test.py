"""Smoke test for the Python bindings.

Builds the extension with cargo (unless PABISIM_PY_LIB points at a built library), loads it
and exercises each entry point on the built-in fixtures.

    python3 python/smoke_test.py
"""

import importlib.machinery
import importlib.util
import os
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    lib = os.environ.get("PABISIM_PY_LIB")
    if lib is None:
        subprocess.run(
            ["cargo", "build", "--release", "-p", "pabisim-py", "--features", "extension-module"],
            cwd=ROOT,
            check=True,
        )
        suffix = {"darwin": "dylib", "win32": "dll"}.get(sys.platform, "so")
        prefix = "" if sys.platform == "win32" else "lib"
        lib = ROOT / "target" / "release" / f"{prefix}pabisim_py.{suffix}"
    loader = importlib.machinery.ExtensionFileLoader("pabisim_py", str(lib))
    spec = importlib.util.spec_from_file_location("pabisim_py", str(lib), loader=loader)
    module = importlib.util.module_from_spec(spec)
    loader.exec_module(module)
    return module


def main():
    pb = load()

    model, mu, nu = pb.fixture("sim-coarser")
    assert model.states[:2] == ["s1", "s2"], model.states
    assert pb.Model(model.to_text()).to_text() == model.to_text()
    assert pb.check(model, mu, nu, rel="plain", depth=3)[0] == "no-violation"
    verdict, detail = pb.check(model, mu, nu, rel="late", depth=2)
    assert verdict == "refuted" and detail, detail
    d = pb.distance(model, mu, nu, gamma="1/2")
    assert d["status"] == "heuristic-bracket" and Fraction(d["value"]) <= Fraction(d["upper"]), d

    _, _, status = pb.state_metric(pb.Model(model.to_text()), gamma="1/2")
    assert status in ("exact-fixpoint", "within-tol"), status

    exam, _, _ = pb.fixture("exam1")
    d = pb.distance(exam, "q:1", "q':1", gamma="1/2")
    assert Fraction(d["value"]) == Fraction(1, 80) and d["status"] == "exact-fixpoint", d

    code, out, _ = pb.run_cli(["gen", "clique", str(ROOT / "crates/core/corpus/undirect-graph.txt")])
    assert code == 0
    clique = pb.Model(out)
    assert clique.classify() == (True, True, True)
    p, word = pb.best_word(clique, maxlen=6)
    assert Fraction(p) == Fraction(3, 18), (p, word)
    same, witness = pb.language_equivalent(clique, clique)
    assert same and witness is None

    try:
        pb.Model("automaton broken\nactions a\nstate x\ninit y:1\n")
    except pb.PabisimError as e:
        assert "unknown state" in str(e), e
    else:
        raise AssertionError("bad model accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
