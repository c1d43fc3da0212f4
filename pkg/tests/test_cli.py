import json

import numpy as np
import pytest

from enhanced_binding import cli


def write_ini(path, run="", potential="", cutoff=""):
    text = ""
    if potential:
        text += "[potential]\n" + potential + "\n"
    if cutoff:
        text += "[cutoff]\n" + cutoff + "\n"
    text += "[run]\n" + run + "\n"
    path.write_text(text)
    return path


def run(argv):
    return cli.main([str(a) for a in argv])


def test_lambda0(tmp_path):
    assert run(["lambda0", "--out", tmp_path]) == 0
    doc = json.loads((tmp_path / "lambda0.json").read_text())
    assert doc["result"]["lambda0"] == pytest.approx(np.pi**2 / 4, rel=1e-10)
    assert doc["config"]["potential"]["kind"] == "indicator"


def test_eta2_report(tmp_path):
    assert run(["eta2", "--out", tmp_path]) == 0
    res = json.loads((tmp_path / "eta2.json").read_text())["result"]
    assert res["C_W"] == pytest.approx(np.pi**4 / 32, rel=1e-10)
    assert res["eta2_C0"] == pytest.approx(res["eta2_C0_closed_form"], rel=1e-12)
    assert res["d_W_plus"]["value"] == 0.0
    assert res["eta2"] == pytest.approx(res["eta2_closed_form"], rel=1e-12)


def test_sigma0_rows(tmp_path):
    ini = write_ini(tmp_path / "r.ini", "alphas = 1e-3, 1e-2\n")
    assert run(["sigma0", "--config", ini, "--out", tmp_path]) == 0
    rows = json.loads((tmp_path / "sigma0.json").read_text())["result"]["rows"]
    assert [r["alpha"] for r in rows] == [1e-3, 1e-2]
    assert rows[1]["sigma0"] == pytest.approx(-1.2281065884e-3, rel=1e-9)


def test_certify_exit_codes(tmp_path):
    ok = write_ini(tmp_path / "a.ini", "alpha = 1e-2\n")
    assert run(["certify", "--config", ok, "--out", tmp_path / "a"]) == 0
    res = json.loads((tmp_path / "a" / "certify.json").read_text())["result"]
    assert res["verdict"] == "bound" and res["margin"] < 0
    weak = write_ini(tmp_path / "b.ini", "alpha = 1e-2\nlambda = 2.0\n")
    assert run(["certify", "--config", weak, "--out", tmp_path / "b"]) == 1


def test_selftest(tmp_path):
    assert run(["selftest", "--out", tmp_path]) == 0
    doc = json.loads((tmp_path / "selftest.json").read_text())
    assert doc["result"]["passed"]


@pytest.mark.parametrize(
    "body",
    [
        "alphas = 0.01, -0.1\n",
        "alpha = abc\n",
        "alpha = 1e-2\ngamma_reg = 1.5\n",
        "alpha = 1e-2\nevaluator = magic\n",
        "alpha = 1e-2\nspin = 1 1\n",
    ],
)
def test_malformed_config(tmp_path, body):
    ini = write_ini(tmp_path / "bad.ini", body)
    out = tmp_path / "out"
    assert run(["certify", "--config", ini, "--out", out]) == 2
    assert not out.exists()


def test_bad_potential_section(tmp_path):
    ini = write_ini(tmp_path / "bad.ini", "alpha = 1e-2\n", potential="kind = wedge\n")
    assert run(["lambda0", "--config", ini, "--out", tmp_path / "o"]) == 2


def test_missing_file(tmp_path):
    assert run(["lambda0", "--config", tmp_path / "nope.ini"]) == 2


def test_sweep_span(tmp_path):
    ini = write_ini(tmp_path / "s.ini", "alphas = 1e-3 1e-2\n")
    assert run(["sweep", "--config", ini, "--out", tmp_path / "o"]) == 2
    assert not (tmp_path / "o").exists()


def test_sweep_deterministic(tmp_path):
    ini = write_ini(tmp_path / "s.ini", "alphas = 1e-4 1e-3 1e-2\nseed = 7\n")
    assert run(["sweep", "--config", ini, "--out", tmp_path / "a"]) == 0
    assert run(["sweep", "--config", ini, "--out", tmp_path / "b", "--threads", "3"]) == 0
    a = (tmp_path / "a" / "sweep.csv").read_bytes()
    assert a == (tmp_path / "b" / "sweep.csv").read_bytes()
    assert a.splitlines()[0] == b"alpha,lambda_c,predicted_bound"


def test_tabulated_potential(tmp_path):
    r = np.linspace(0, 1, 5)
    np.savetxt(tmp_path / "w.txt", np.column_stack([r, -np.ones_like(r)]))
    ini = write_ini(tmp_path / "t.ini", "alpha = 1e-2\n", potential="kind = tabulated\npath = w.txt\n")
    assert run(["lambda0", "--config", ini, "--out", tmp_path / "o"]) == 0
    res = json.loads((tmp_path / "o" / "lambda0.json").read_text())["result"]
    assert res["lambda0"] == pytest.approx(np.pi**2 / 4, rel=1e-8)


def test_numeric_failure(tmp_path):
    # a purely repulsive tabulated well passes validation but cannot bind
    r = np.linspace(0, 1, 5)
    np.savetxt(tmp_path / "w.txt", np.column_stack([r, np.ones_like(r)]))
    ini = write_ini(tmp_path / "t.ini", "alpha = 1e-2\n", potential="kind = tabulated\npath = w.txt\n")
    assert run(["lambda0", "--config", ini, "--out", tmp_path / "o"]) == 3
