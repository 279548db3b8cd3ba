import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given

from toda.cli import main
from toda.core import FlaschkaState, PhaseState, SpectralPoint
from toda.errors import InvariantError
from toda.io import format_float, load_state, save_state, state_from_document, state_to_document
from toda.verify import VerifyReport, run_checks

from strategies import flaschka_states, phase_states


def _write(tmp_path, doc, name="state.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def f0_doc(tmp_path):
    return _write(tmp_path, {"n": 2, "a": [1.0], "b": [2.0, 2.0]})


def test_simulate_conserves_h(capsys, f0_doc):
    code, out, _ = _run(capsys, "simulate", "--input", f0_doc, "--t-end", "5", "--samples", "11")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 11
    assert list(rows[0]) == ["t", "a1", "b1", "b2", "H1", "H2", "I1"]
    for key in ("H1", "H2"):
        values = np.array([float(r[key]) for r in rows])
        np.testing.assert_allclose(values, values[0], rtol=1e-8)
    i1 = np.array([float(r["I1"]) for r in rows])
    np.testing.assert_allclose(i1, 1.0, rtol=1e-7)


def test_simulate_zero_time_echoes_input(capsys, f0_doc):
    code, out, _ = _run(capsys, "simulate", "--input", f0_doc, "--t-end", "0")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 1
    assert [float(rows[0][k]) for k in ("t", "a1", "b1", "b2")] == [0.0, 1.0, 2.0, 2.0]


def test_simulate_blank_extra_integral_when_gauge_singular(capsys, tmp_path):
    path = _write(tmp_path, {"n": 2, "a": [0.5], "b": [0.0, 0.0]})
    code, out, _ = _run(capsys, "simulate", "--input", path, "--t-end", "1", "--samples", "2")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and rows[0]["I1"] == ""


def test_simulate_leapfrog(capsys, tmp_path):
    path = _write(tmp_path, {"n": 2, "q": [math.log(2), -math.log(2)], "p": [-4.0, -4.0]})
    code, out, _ = _run(capsys, "simulate", "--input", path, "--t-end", "1", "--samples", "3",
                        "--integrator", "leapfrog", "--step", "1e-3")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and list(rows[0])[:5] == ["t", "q1", "q2", "p1", "p2"]
    np.testing.assert_allclose([float(r["I1"]) for r in rows], 1.0, rtol=1e-5)


def test_simulate_output_file_is_deterministic(capsys, tmp_path, f0_doc):
    paths = [str(tmp_path / f"run{i}.csv") for i in range(2)]
    for p in paths:
        assert main(["simulate", "--input", f0_doc, "--t-end", "3", "-o", p]) == 0
    assert open(paths[0], "rb").read() == open(paths[1], "rb").read()


@pytest.mark.parametrize("doc", [
    {"n": 2, "a": [0.0], "b": [1.0, 2.0]},
    {"n": 3, "a": [1.0], "b": [1.0, 2.0]},
    {"n": 2, "a": [1.0], "b": [1.0, 2.0], "q": [0, 0], "p": [0, 0]},
    {"n": 2, "lambda": [1.0, 3.0], "r": [1.0, 1.0]},
    {"n": 2, "a": [1.0], "b": [1.0, "x"]},
    [1, 2],
])
def test_invalid_documents_exit_2(capsys, tmp_path, doc):
    code, _, err = _run(capsys, "simulate", "--input", _write(tmp_path, doc), "--t-end", "1")
    assert code == 2
    assert "input error" in err


def test_zero_coupling_message(capsys, tmp_path):
    path = _write(tmp_path, {"n": 2, "a": [0.0], "b": [1.0, 2.0]})
    _, _, err = _run(capsys, "simulate", "--input", path, "--t-end", "1")
    assert "positive" in err


def test_missing_file_and_input(capsys, tmp_path):
    assert _run(capsys, "spectra", "--input", str(tmp_path / "nope.json"))[0] == 2
    assert _run(capsys, "spectra")[0] == 2
    assert _run(capsys, "simulate", "--input", str(tmp_path / "nope.json"), "--t-end", "-1")[0] == 2


def test_spectra(capsys, f0_doc):
    code, out, _ = _run(capsys, "spectra", "--input", f0_doc)
    doc = json.loads(out)
    assert code == 0
    np.testing.assert_allclose(doc["lambda"], [3.0, 1.0], atol=1e-14)
    np.testing.assert_allclose(doc["rho"], [0.5, 0.5], atol=1e-14)
    np.testing.assert_allclose(doc["r_canonical"], [1.0, 1.0], atol=1e-14)


def test_reconstruct_methods(capsys, tmp_path):
    sym = _write(tmp_path, {"n": 2, "lambda": [0.5, -0.5], "r": [1.0, 1.0]})
    code, _, err = _run(capsys, "reconstruct", "--input", sym, "--method", "hankel")
    assert code == 3 and "B_1" in err
    code, out, _ = _run(capsys, "reconstruct", "--input", sym, "--method", "lanczos")
    doc = json.loads(out)
    assert code == 0
    np.testing.assert_allclose(doc["a"], [0.5], atol=1e-15)
    np.testing.assert_allclose(doc["b"], [0.0, 0.0], atol=1e-15)
    ok = _write(tmp_path, {"n": 2, "lambda": [3.0, 1.0], "r": [0.125, 0.5]}, "ok.json")
    for precision in ("double", "high"):
        code, out, _ = _run(capsys, "reconstruct", "--input", ok, "--method", "hankel", "--precision", precision)
        np.testing.assert_allclose(json.loads(out)["b"], [49 / 17, 19 / 17], atol=1e-13)


def test_reconstruct_rejects_other_charts(capsys, f0_doc):
    assert _run(capsys, "reconstruct", "--input", f0_doc)[0] == 2


def test_exact(capsys, f0_doc):
    code, out, _ = _run(capsys, "exact", "--input", f0_doc, "--t-end", repr(math.log(2)))
    doc = json.loads(out)
    assert code == 0
    np.testing.assert_allclose(doc["a"], [8 / 17], atol=1e-13)
    np.testing.assert_allclose(doc["b"], [49 / 17, 19 / 17], atol=1e-13)
    assert doc["q_sum"] == pytest.approx(-8 * math.log(2))


def test_exact_underflow_exit_3(capsys, f0_doc):
    assert _run(capsys, "exact", "--input", f0_doc, "--t-end", "1000")[0] == 3


def test_roundtrip_random(capsys):
    code, out, _ = _run(capsys, "roundtrip", "--random", "6", "--seed", "1")
    doc = json.loads(out)
    assert code == 0 and doc["method"] == "lanczos" and doc["max_abs_error"] < 1e-9


def test_verify_random_passes(capsys):
    code, out, _ = _run(capsys, "verify", "--random", "4", "--seed", "7")
    assert code == 0
    assert out.strip().endswith("overall: PASS")
    names = [line.split()[1] for line in out.splitlines()[:-1]]
    assert names == sorted(names)
    assert "noether_n2_correspondence" not in names


def test_verify_two_particles_includes_noether(capsys, tmp_path):
    path = _write(tmp_path, {"n": 2, "q": [math.log(2), -math.log(2)], "p": [-4.0, -4.0]})
    code, out, _ = _run(capsys, "verify", "--input", path)
    assert code == 0 and "noether_n2_correspondence" in out


def test_verify_fails_with_printed_sign(capsys):
    code, out, _ = _run(capsys, "verify", "--random", "3", "--seed", "2", "--paper-faithful-sign")
    assert code == 1
    assert "FAIL  i_conservation" in out


def test_verify_output_deterministic(capsys):
    outs = {_run(capsys, "verify", "--random", "3", "--seed", "5")[1] for _ in range(2)}
    assert len(outs) == 1


def test_verify_report_logic():
    rep = VerifyReport()
    rep.add("b", 1e-3, 1e-2)
    rep.add("a", 1.0, 1e-2)
    assert not rep.passed
    lines = rep.format().splitlines()
    assert lines[0].startswith("FAIL  a") and lines[-1] == "overall: FAIL"


def test_run_checks_on_gauge_singular_state():
    rep = run_checks(FlaschkaState([0.5], [0.0, 0.0]), t_end=1.0)
    assert not rep.passed


@given(flaschka_states())
def test_documents_round_trip(state):
    back, q_sum = state_from_document(json.loads(json.dumps(state_to_document(state, 0.1))))
    np.testing.assert_array_equal(back.a, state.a)
    np.testing.assert_array_equal(back.b, state.b)
    assert q_sum == 0.1


@given(phase_states())
def test_files_round_trip(tmp_path_factory, state):
    path = tmp_path_factory.mktemp("docs") / "s.json"
    save_state(path, state)
    back, _ = load_state(path)
    np.testing.assert_array_equal(back.q, state.q)
    np.testing.assert_array_equal(back.p, state.p)


def test_spectral_document_round_trip(tmp_path):
    point = SpectralPoint([3.0, 1.0, -1 / 3], [0.1, 1 / 7, 2.0])
    save_state(tmp_path / "p.json", point)
    back, _ = load_state(tmp_path / "p.json")
    np.testing.assert_array_equal(back.lam, point.lam)
    np.testing.assert_array_equal(back.r, point.r)


def test_format_float_round_trips():
    for x in (1 / 3, 1e-300, -2.5e17, math.pi):
        assert float(format_float(x)) == x
    assert format_float(float("nan")) == ""


def test_document_validation():
    with pytest.raises(InvariantError):
        state_from_document({"n": 2, "a": [1.0], "b": [1.0, 2.0], "q_sum": float("inf")})
    with pytest.raises(InvariantError):
        state_from_document({"n": "2", "q": [0, 0], "p": [0, 0]})
    state, q_sum = state_from_document({"q": [0, 1], "p": [0, 0]})
    assert isinstance(state, PhaseState) and q_sum == 0.0
