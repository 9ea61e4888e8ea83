import json
import os
import subprocess

import numpy as np
import pytest

import wakefar


@pytest.fixture(scope="module")
def solution():
    return wakefar.solve()


def test_solve_reports_profiles(solution):
    prof = solution["profiles"]
    assert solution["status"] in ("converged", "least-squares floor")
    assert 0.0 < solution["h0"] < 1.0
    assert prof["tau"][0] == 0.0
    assert np.all(np.diff(prof["tau"]) > 0.0)
    assert np.all(np.diff(prof["E"]) <= 0.0)
    assert prof["H"][0] == pytest.approx(solution["h0"])


def test_edge_coefficients():
    ex = wakefar.edge(1.0, 1.0)
    assert ex["p"] == pytest.approx(10 / 7)
    assert ex["h_slope"] == pytest.approx(15.1667, rel=1e-5)
    assert min(ex["residual_order"]) >= 0.5


def test_verify_riccati():
    rows = wakefar.verify("riccati")
    assert rows and all(r["pass"] for r in rows)


def test_errors_are_typed():
    with pytest.raises(wakefar.ConfigError):
        wakefar.verify("nope")
    with pytest.raises(wakefar.WakeError):
        wakefar.edge(1.0, 1.0, alpha=-1.0)


def test_short_march():
    out = wakefar.march(n=33, x1=2.0)
    assert out["steps"] > 0
    assert out["x"][0] == 1.0
    assert out["e0"][-1] < out["e0"][0]


def test_cli_in_process():
    code, out, err = wakefar.run_cli(["edge", "--a", "1", "--c1", "1"])
    assert code == 0
    assert "h_slope," in out
    assert json.loads(err.strip().splitlines()[-1])["command"] == "edge"
    assert wakefar.run_cli(["solve", "--bogus"])[0] == 3


@pytest.mark.skipif("WAKEFAR_BIN" not in os.environ, reason="CLI binary path not given")
def test_cli_binary(tmp_path):
    res = subprocess.run(
        [os.environ["WAKEFAR_BIN"], "verify", "--suite", "riccati", "--report", str(tmp_path / "r.csv")],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0
    assert (tmp_path / "r.csv").read_text().startswith("suite,check,value")
