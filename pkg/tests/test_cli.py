import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from dissipq.cli import build_parser, run

from conftest import NETLISTS

SUBCOMMANDS = ["validate", "derive", "foster", "spectra", "evolve", "steady", "oracle-compare"]


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def net(name):
    return NETLISTS / name


def read_csv(text):
    lines = text.splitlines()
    return lines[0].split(","), np.array([[float(v) for v in l.split(",")] for l in lines[1:]])


def test_validate_ok():
    code, out, _ = call("validate", net("single_qubit.dq"))
    assert code == 0
    rep = json.loads(out)
    assert rep["level"] == "OK"
    assert rep["canonical"].startswith("qubit A")


def test_validate_error_exit():
    code, out, _ = call("validate", net("unsupported.dq"))
    assert code == 1
    assert json.loads(out)["level"] == "ERROR"


def test_netlist_errors_exit_one(tmp_path):
    bad = tmp_path / "bad.dq"
    bad.write_text("qubit A freq=5GHz C=80fF\nqubit A freq=5GHz C=80fF\n")
    code, out, err = call("validate", bad)
    assert code == 1 and out == ""
    assert "DuplicateName" in err


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["validate"],
    ["validate", "/nonexistent/file.dq"],
    ["spectra", NETLISTS / "single_qubit.dq", "--wmin", "0", "--wmax", "1e10", "--points", "-5"],
    ["spectra", NETLISTS / "single_qubit.dq", "--wmin", "-1", "--wmax", "1e10"],
    ["spectra", NETLISTS / "single_qubit.dq", "--wmin", "2e10", "--wmax", "1e10"],
    ["foster", NETLISTS / "single_qubit.dq", "--modes", "0"],
    ["evolve", NETLISTS / "single_qubit.dq", "--csv", "--json"],
    ["evolve", NETLISTS / "single_qubit.dq", "--init", "nowhere.json"],
    ["derive", NETLISTS / "separate.dq", "--strong"],
    ["validate", NETLISTS / "single_qubit.dq", "--netlist", NETLISTS / "common.dq"],
])
def test_usage_errors_exit_two(argv):
    code, out, err = call(*argv)
    assert code == 2
    assert out == ""
    assert err.startswith("error:")


@pytest.mark.parametrize("sub", SUBCOMMANDS)
def test_help(sub, capsys):
    assert run([sub, "--help"]) == 0
    text = capsys.readouterr().out
    assert "usage: dissipq " + sub in text
    assert "example: dissipq " + sub in text


def test_every_subcommand_example_netlist_exists():
    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "subcommand")
    for name, sp in sub.choices.items():
        path = sp.epilog.split()[3]
        assert (NETLISTS.parent / path).is_file(), (name, path)


def test_derive_report():
    code, out, _ = call("derive", net("common.dq"))
    assert code == 0
    rep = json.loads(out)
    assert rep["topology"] == "TwoQubitCommonBath"
    assert rep["direct_coupling"] == 0.0
    assert {(c["qubit"], c["bath"]) for c in rep["channels"]} == {("A", "R1"), ("B", "R1")}
    assert all(c["gamma_up"] == 0.0 for c in rep["channels"])


def test_derive_strong():
    code, out, _ = call("derive", net("single_qubit.dq"), "--strong", "--modes", "300")
    assert code == 0
    strong = json.loads(out)["strong"]
    assert strong["n_modes"] == 300
    assert strong["renormalized_omega_ratio"][0] == pytest.approx(1.0, abs=1e-3)


def test_derive_separate_rates():
    rep = json.loads(call("derive", net("separate.dq"))[1])
    temps = {c["bath"]: c["T"] for c in rep["channels"]}
    assert temps == {"R1": 0.02, "R2": 0.08}


def test_foster_csv(tmp_path):
    dest = tmp_path / "chain.csv"
    code, out, _ = call("foster", "--netlist", net("single_qubit.dq"), "--modes", "10", "-o", dest)
    assert code == 0 and out == ""
    header, data = read_csv(dest.read_text())
    assert header == ["j", "omega_j", "C_j", "L_j"]
    assert data.shape == (10, 4)
    np.testing.assert_allclose(data[:, 2] * data[:, 3] * data[:, 1] ** 2, 1.0, rtol=1e-15)


def test_spectra_csv():
    code, out, _ = call("spectra", net("single_qubit_thermal.dq"), "--wmin", "0", "--wmax", "1e11", "--points", "11")
    assert code == 0
    header, data = read_csv(out)
    assert header == ["omega", "S_VV", "S_sym", "J", "J_filtered"]
    assert data.shape == (11, 5)
    k_B = 1.380649e-23
    assert data[0, 2] == pytest.approx(4 * k_B * 0.05 * 50, rel=1e-15)
    assert data[0, 1] == pytest.approx(2 * k_B * 0.05 * 50, rel=1e-15)
    np.testing.assert_array_equal(data[:, 3], data[:, 4])


def test_spectra_filtered_peak():
    code, out, _ = call("spectra", net("filtered.dq"), "--wmin", "1e9", "--wmax", "1e12", "--points", "500")
    _, data = read_csv(out)
    ratio = data[:, 4] / data[:, 3]
    assert ratio.max() <= 1.0
    wf = 1 / math.sqrt(20e-12 * 50.66059182e-12)
    assert abs(data[np.argmax(ratio), 0] - wf) < 2 * (1e12 - 1e9) / 499


def test_evolve_csv_decay():
    code, out, _ = call("evolve", net("single_qubit.dq"), "--samples", "20")
    assert code == 0
    header, data = read_csv(out)
    assert header == ["t", "p_g", "p_e", "trace_dev", "min_eig"]
    assert data[0, 2] == 1.0
    assert data[-1, 2] == pytest.approx(math.exp(-5), rel=1e-6)
    assert np.all(data[:, 3] < 1e-9) and np.all(data[:, 4] > -1e-9)


def test_evolve_json_and_custom_state(tmp_path):
    state = tmp_path / "rho.json"
    state.write_text(json.dumps({"re": [[0, 0, 0, 0], [0, 0.5, 0.5, 0], [0, 0.5, 0.5, 0], [0, 0, 0, 0]]}))
    code, out, _ = call("evolve", net("common.dq"), "--init", state, "--samples", "10", "--json")
    assert code == 0
    rep = json.loads(out)
    named = json.loads(call("evolve", net("common.dq"), "--init", "bell-plus", "--samples", "10", "--json")[1])
    np.testing.assert_allclose(rep["p_gg"], named["p_gg"], rtol=1e-14)


def test_steady():
    rep = json.loads(call("steady", net("single_qubit_thermal.dq"))[1])
    assert rep["kernel_dim"] == 1
    assert sum(rep["populations"]) == pytest.approx(1.0)
    dark = json.loads(call("steady", net("common.dq"))[1])
    assert dark["degenerate"] and "basis" in dark and "rho" not in dark


def test_oracle_compare():
    code, out, _ = call("oracle-compare", net("single_qubit.dq"), "--modes", "2000")
    assert code == 0
    rep = json.loads(out)
    for key in ("gamma_lindblad", "gamma_fitted", "relative_error", "recurrence_time", "fit_residual"):
        assert key in rep
    assert rep["relative_error"] < 0.10


def test_oracle_compare_rejections():
    assert call("oracle-compare", net("single_qubit_thermal.dq"), "--modes", "100")[0] == 1
    assert call("oracle-compare", net("common.dq"), "--modes", "100", "--init", "antisymmetric")[0] == 2


@pytest.mark.parametrize("argv", [
    ["derive", "netlists/common_direct.dq"],
    ["spectra", "netlists/filtered.dq", "--wmin", "0", "--wmax", "1e11", "--points", "50"],
    ["evolve", "netlists/separate.dq", "--samples", "20"],
    ["oracle-compare", "netlists/single_qubit.dq", "--modes", "300"],
])
def test_deterministic_output(argv):
    argv = [str(NETLISTS.parent / a) if a.startswith("netlists/") else a for a in argv]
    first, second = call(*argv), call(*argv)
    assert first[0] == 0
    assert first == second


def test_thread_knob(monkeypatch):
    monkeypatch.setenv("DISSIPQ_THREADS", "1")
    assert call("validate", net("single_qubit.dq"))[0] == 0
    monkeypatch.setenv("DISSIPQ_THREADS", "zero")
    assert call("validate", net("single_qubit.dq"))[0] == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dissipq", "validate", str(net("single_qubit.dq"))],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["topology"] == "SingleQubitBath"
