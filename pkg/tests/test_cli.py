import json
import subprocess
import sys

import numpy as np
import pytest

from torsionlab import cli
from torsionlab.cli import JobSpec, main, run
from torsionlab.schemas import (
    SchemaError,
    boundary_model_from_doc,
    boundary_model_to_doc,
    canonical_json,
    complex_from_doc,
    complex_to_doc,
    fixture_path,
    spectrum_from_doc,
    spectrum_to_doc,
    twisted_from_doc,
    twisted_to_doc,
)


def run_cli(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def fx(name):
    return str(fixture_path(name))


def test_torsion_two_term(capsys):
    code, out, _ = run_cli(capsys, "torsion", "--input", fx("two_term_a2"))
    rep = json.loads(out)
    assert code == 0 and rep["passed"]
    assert rep["payload"]["rho_an"] == [2.0, 0.0]
    assert rep["schema"].startswith("torsionlab.report/")
    for c in rep["checks"]:
        assert {"residual", "tolerance", "passed"} <= c.keys()


def test_validate_gamma_not_involutive(capsys):
    code, out, err = run_cli(capsys, "validate", "--input", fx("gamma_not_involutive"))
    rep = json.loads(out)
    assert code == 1 and not rep["passed"]
    failed = [c["name"] for c in rep["checks"] if not c["passed"]]
    assert any("degree" in name for name in failed)
    assert "FAILED" in err


def test_cylinder_quarter(capsys, tmp_path):
    csv_path = tmp_path / "trace.csv"
    code, out, _ = run_cli(capsys, "cylinder", "--input", fx("quarter_cylinder"), "--csv", str(csv_path))
    rep = json.loads(out)
    assert code == 0
    assert rep["payload"]["zeta0"] == pytest.approx(0.25, abs=1e-15)
    assert rep["payload"]["mellin_residual"] < 1e-6
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "t,value" and len(lines) == 42
    assert all(len(row.split(",")) == 2 for row in lines[1:])


@pytest.mark.parametrize("name", ["circle", "torus", "solid_torus"])
def test_cohomology_fixtures(capsys, name):
    code, out, _ = run_cli(capsys, "cohomology", "--input", fx(name))
    assert code == 0
    assert json.loads(out)["payload"]["les_ok"]


def test_solid_torus_payload(capsys):
    _, out, _ = run_cli(capsys, "cohomology", "--input", fx("solid_torus"))
    p = json.loads(out)["payload"]
    assert p["boundary"][1] == 2 and p["rank_jstar"] == 1


def test_identity_and_wellposed(capsys):
    assert run_cli(capsys, "identity", "--input", fx("two_term_a2"))[0] == 0
    assert run_cli(capsys, "wellposed", "--seed", "3")[0] == 0


def test_parse_failures(capsys, tmp_path):
    assert run_cli(capsys, "torsion", "--input", str(tmp_path / "missing.json"))[0] == 2
    assert run_cli(capsys, "torsion", "--input", fx("two_term_a2"), "--theta", "1")[0] == 2
    assert run_cli(capsys, "torsion", "--input", fx("two_term_a2"), "--lambda", "-1")[0] == 2
    assert run_cli(capsys, "frobnicate")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli(capsys, "validate", "--input", str(bad))[0] == 2
    bad.write_text(json.dumps({"kind": "chain_complex", "dims": [1, 1]}))
    assert run_cli(capsys, "torsion", "--input", str(bad))[0] == 2


def test_numerical_failure_exit(monkeypatch):
    from torsionlab.cylinder_heat import QuadratureError

    def boom(job, rep):
        raise QuadratureError("no convergence")

    monkeypatch.setitem(cli._HANDLERS, "cylinder", boom)
    rep, code = run(JobSpec("cylinder", fx("quarter_cylinder")))
    assert code == 3 and rep.error.startswith("numerical")


def test_report_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["torsion", "--input", fx("two_term_a2"), "--seed", "5", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_console_entry_point(tmp_path):
    out = tmp_path / "r.json"
    proc = subprocess.run([sys.executable, "-m", "torsionlab.cli", "torsion", "--input", fx("two_term_a2"), "--out", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(out.read_text())["payload"]["rho_an"] == [2.0, 0.0]


def test_canonical_json_format():
    text = canonical_json({"b": 1 / 3, "a": 1 + 2j})
    assert text.endswith("\n")
    assert json.loads(text) == {"a": [1.0, 2.0], "b": 0.333333333333333}
    assert text.index('"a"') < text.index('"b"')


def test_complex_round_trip():
    from torsionlab.graded_complex import random_complex

    C = random_complex(np.random.default_rng(0), 3)
    D = complex_from_doc(json.loads(canonical_json(complex_to_doc(C))))
    assert D.dims == C.dims
    assert all(np.allclose(a, b, atol=1e-13) for a, b in zip(C.nabla, D.nabla))


def test_boundary_and_spectrum_round_trip():
    from torsionlab.boundary_model import random_boundary_model
    from torsionlab.cylinder_heat import degreewise_zeta0, random_spectral_model

    M = random_boundary_model(np.random.default_rng(1), 5)
    N = boundary_model_from_doc(json.loads(canonical_json(boundary_model_to_doc(M))))
    assert N.dims == M.dims and np.allclose(N.nabla_full(), M.nabla_full(), atol=1e-13)
    S = random_spectral_model(np.random.default_rng(2), 5)
    T = spectrum_from_doc(json.loads(canonical_json(spectrum_to_doc(S))))
    assert degreewise_zeta0(T) == degreewise_zeta0(S)


def test_twisted_round_trip():
    from torsionlab.twisted_cochain import solid_torus_spec

    spec = solid_torus_spec(np.exp(0.4j))
    again = twisted_from_doc(json.loads(canonical_json(twisted_to_doc(spec))))
    assert again.cells == spec.cells


def test_wrong_kind_rejected():
    with pytest.raises(SchemaError):
        complex_from_doc({"kind": "twisted_complex"})
