import contextlib
import io
import json
import math
import pathlib

import numpy as np
import pytest

from fcompare import cli
from fcompare.pipeline import synthetic_blobs

import oracles

DATA = pathlib.Path(__file__).parent / "data"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        try:
            code = cli.main([str(a) for a in argv])
        except SystemExit as exc:
            code = exc.code
    return code, out.getvalue(), err.getvalue()


def write_records(path, recs):
    path.write_text("z,l1,l2\n" + "".join(f"{z},{a},{b}\n" for z, a, b in recs))
    return path


@pytest.fixture
def blobs_csv(tmp_path):
    d = synthetic_blobs(1500, 0.15, 2, 2.0, seed=7)
    lines = ["x0,x1,label"] + [f"{a!r},{b!r},{y}" for (a, b), y in zip(d.features.tolist(), d.labels)]
    p = tmp_path / "blobs.csv"
    p.write_text("\n".join(lines) + "\n")
    return p


@pytest.fixture
def pmf_json(tmp_path, p_star):
    p = tmp_path / "pmf.json"
    p.write_text(json.dumps(p_star.as_dict()))
    return p


# --- compare ----------------------------------------------------------------

def test_perfect_identical_rules_exit_2(tmp_path):
    f = write_records(tmp_path / "x.csv", [(1, 1, 1)] * 10 + [(0, 0, 0)] * 20)
    code, out, err = run("compare", f, "--format", "json")
    assert code == 2
    env = json.loads(out)
    assert env["status"] == "DegenerateDifference"
    assert env["payload"]["stats1"]["f"] == env["payload"]["stats2"]["f"] == 1.0
    assert env["payload"]["z"] is None and env["payload"]["p_value"] is None
    assert "DegenerateDifference" in err


def test_zero_tp_exit_2(tmp_path):
    f = write_records(tmp_path / "x.csv", [(1, 1, 0), (0, 1, 1), (1, 0, 0), (0, 0, 0)])
    code, out, _ = run("compare", f, "--format", "json")
    assert code == 2
    env = json.loads(out)
    assert env["status"] == "InfiniteVariance"
    assert env["payload"]["stats2"]["f"] == 0.0 and env["payload"]["z"] is None


def test_independent_corr_zero():
    code, out, _ = run("compare", DATA / "pstar_1000.csv", "--method", "independent", "--format", "json")
    assert code == 0
    assert json.loads(out)["payload"]["corr"] == 0.0


@pytest.mark.parametrize("method", ["jvesr", "independent"])
def test_golden_report(method):
    code, out, _ = run("compare", DATA / "pstar_1000.csv", "--method", method, "--format", "json")
    assert code == 0
    assert out == (DATA / f"pstar_1000_{method}.json").read_text()


def test_golden_values_against_oracles():
    env = json.loads((DATA / "pstar_1000_jvesr.json").read_text())
    p = env["payload"]
    recs = [tuple(r) for r in np.loadtxt(DATA / "pstar_1000.csv", delimiter=",", skiprows=1, dtype=int)]
    hist = oracles.histogram(recs)
    props = np.array([hist[t] for t in oracles.TRIPLES]) / len(recs)
    for a, key in ((1, "stats1"), (2, "stats2")):
        s = p[key]
        assert s["var"] == pytest.approx(oracles.straight_line_var(s["tp"], s["fp"], s["fn"], 1000), rel=1e-12)
        assert s["var"] == pytest.approx(oracles.delta_cov_fd(props, 1000, a, a), rel=1e-5)
    assert p["cov12"] == pytest.approx(oracles.delta_cov_fd(props, 1000, 1, 2), rel=1e-5)
    z = (p["stats1"]["f"] - p["stats2"]["f"]) / math.sqrt(
        p["stats1"]["var"] + p["stats2"]["var"] - 2 * p["cov12"])
    assert p["z"] == pytest.approx(z, rel=1e-12)


def test_parse_error_exit_1(tmp_path):
    f = tmp_path / "x.csv"
    f.write_text("z,l1,l2\n1,2,0\n")
    code, out, err = run("compare", f)
    assert code == 1 and out == ""
    assert "line 2" in err


def test_json_round_trips_losslessly():
    code, out, _ = run("compare", DATA / "pstar_1000.csv", "--format", "json")
    env = json.loads(out)
    assert cli.dumps(env) + "\n" == out


def test_float_format_has_17_digits():
    assert cli._fmt_float(0.1) == "0.10000000000000001"
    assert cli._fmt_float(1.0) == "1.0"
    assert float(cli._fmt_float(math.pi)) == math.pi
    assert cli._fmt_float(float("nan")) == "null"


def _table_numbers(text):
    nums = set()
    for tok in text.replace("=", " ").split():
        try:
            nums.add(float(tok))
        except ValueError:
            pass
    return nums


def _json_numbers(obj):
    if isinstance(obj, dict):
        for v in obj.values():
            yield from _json_numbers(v)
    elif isinstance(obj, list):
        for v in obj:
            yield from _json_numbers(v)
    elif isinstance(obj, (int, float)) and not isinstance(obj, bool):
        yield float(obj)


@pytest.mark.parametrize("argv", [
    ("compare", DATA / "pstar_1000.csv"),
    ("compare", DATA / "pstar_1000.csv", "--method", "independent"),
])
def test_table_and_json_agree(argv):
    _, js, _ = run(*argv, "--format", "json")
    _, tb, _ = run(*argv, "--format", "table")
    assert set(_json_numbers(json.loads(js)["payload"])) <= _table_numbers(tb)


# --- simulate ---------------------------------------------------------------

def test_simulate_point_mass(tmp_path):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({f"{i:03b}": float(i == 7) for i in range(8)}))
    code, out, _ = run("simulate", p, "--n", 50, "--reps", 20, "--seed", 1, "--format", "json")
    assert code == 0
    payload = json.loads(out)["payload"]
    assert payload["emp_var1"] == payload["emp_var2"] == 0.0


def test_simulate_bad_pmf(tmp_path):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({f"{i:03b}": 0.9 / 8 for i in range(8)}))
    code, out, err = run("simulate", p)
    assert code == 1 and "sum" in err


def test_simulate_no_retained(tmp_path):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"000": 0.5, "001": 0.1, "010": 0.1, "011": 0.1,
                             "100": 0.2, "101": 0.0, "110": 0.0, "111": 0.0}))
    code, out, _ = run("simulate", p, "--reps", 10, "--seed", 0, "--format", "json")
    assert code == 2
    assert json.loads(out)["status"] == "NoRetainedReps"


def test_simulate_random_seed_is_echoed(pmf_json):
    code, out, _ = run("simulate", pmf_json, "--reps", 10, "--n", 100, "--format", "json")
    env = json.loads(out)
    assert code == 0 and isinstance(env["seed"], int)
    code, again, _ = run("simulate", pmf_json, "--reps", 10, "--n", 100, "--format", "json",
                         "--seed", env["seed"])
    assert again == out


def test_simulate_table_and_json_agree(pmf_json):
    args = ("simulate", pmf_json, "--reps", 200, "--n", 300, "--seed", 3)
    _, js, _ = run(*args, "--format", "json")
    _, tb, _ = run(*args, "--format", "table")
    assert set(_json_numbers(json.loads(js)["payload"])) <= _table_numbers(tb)


# --- pipeline ---------------------------------------------------------------

def test_pipeline_missing_label(blobs_csv):
    code, _, err = run("pipeline", blobs_csv, "--label-col", "target", "--test-fraction", 0.5)
    assert code == 1 and "target" in err


def test_pipeline_requires_test_fraction(blobs_csv):
    code, _, _ = run("pipeline", blobs_csv, "--label-col", "label")
    assert code == 1


def test_pipeline_deterministic(blobs_csv):
    args = ("pipeline", blobs_csv, "--label-col", "label", "--test-fraction", 0.5,
            "--c", 50, "--n", 300, "--seed", 11, "--format", "json")
    first = run(*args)
    assert first[0] == 0
    assert run(*args) == first
    assert run(*args, "--workers", 4) == first
    env = json.loads(first[1])
    assert env["payload"]["c"] == 50 and env["payload"]["c_minus"] <= 50


def test_pipeline_table(blobs_csv):
    args = ("pipeline", blobs_csv, "--label-col", "label", "--test-fraction", 0.5,
            "--c", 30, "--n", 200, "--seed", 2)
    code, tb, _ = run(*args, "--format", "table")
    _, js, _ = run(*args, "--format", "json")
    assert code == 0 and "simulated" in tb and "c_minus" in tb
    p = json.loads(js)["payload"]
    for block in ("simulated", "jvesr", "independent"):
        assert set(_json_numbers(p[block])) <= _table_numbers(tb)
