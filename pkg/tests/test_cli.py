import csv
import io
import json
import math
import subprocess
import sys

import pytest

from gumbelrates import cli
from gumbelrates.cli import SWEEP_COLUMNS, main, parse_n_grid
from gumbelrates.verify import Check


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def strip_timestamp(doc):
    doc["metadata"].pop("timestamp")
    return doc


def test_parse_n_grid():
    g = parse_n_grid("geometric(1e4,1e16,13)")
    assert len(g) == 13 and g[0] == 1e4 and g[-1] == 1e16 and g[4] == 1e8
    assert parse_n_grid("geometric(100, 1000, 1)") == [100.0]
    assert parse_n_grid("1e4, 1e8") == [1e4, 1e8]
    for bad in ("geometric(10,1,3)", "abc", "", "geometric(0,10,2)"):
        with pytest.raises(cli.UsageError):
            parse_n_grid(bad)


def test_constants_json(capsys):
    code, out, _ = run(capsys, "constants")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema_version"] == "1"
    assert doc["metadata"]["tool"] == "gumbelrates"
    names = {c["name"]: c["value"] for c in doc["constants"]}
    assert abs(names["d4"] - 30.777) < 0.01


def test_constants_csv(capsys):
    code, out, _ = run(capsys, "constants", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "name,value,published"
    assert "\r" not in out


def test_metric_json_round_trip(capsys):
    code, out, _ = run(capsys, "metric", "--name", "be", "--n", "1e8", "--scheme", "hall")
    assert code == 0
    doc = json.loads(out)
    r = doc["results"][0]
    assert r["result"]["metric"] == "be" and r["scheme"]["kind"] == "hall"
    assert r["result"]["value"] > 0
    assert doc["metadata"]["config"]["n"] == 1e8
    assert json.loads(json.dumps(doc)) == doc


def test_metric_kl_both_routes(capsys):
    code, out, _ = run(capsys, "metric", "--metric", "kl", "--n", "1e6", "--route", "both")
    assert code == 0
    extras = json.loads(out)["results"][0]["result"]["extras"]
    assert extras["gap"] <= 1e-6 * extras["direct"]
    assert extras["agree"] is True


def test_metric_requires_n(capsys):
    code, _, err = run(capsys, "metric", "--metric", "be")
    assert code == 2 and "--n" in err


def test_sweep_csv_format(capsys):
    code, out, _ = run(capsys, "sweep", "--scheme", "classical", "--metric", "be,tv",
                       "--n-grid", "1e4,1e8")
    assert code == 0
    assert "\r\n" not in out
    rows = list(csv.DictReader(io.StringIO(out)))
    assert tuple(rows[0]) == SWEEP_COLUMNS
    assert len(rows) == 4
    for r in rows:
        assert r["error"] == ""
        v = float(r["value"])
        assert format(v, ".17g") == r["value"]
        assert math.isclose(float(r["ratio_finite"]), v / float(r["finite_n_prediction"]), rel_tol=1e-15)


def test_sweep_deterministic_and_jobs_invariant(capsys):
    args = ("sweep", "--scheme", "hall,second", "--metric", "w1", "--n-grid", "geometric(1e4,1e8,3)")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    _, c, _ = run(capsys, *args, "--jobs", "2")
    assert a == b == c


def test_sweep_json_modulo_timestamp(capsys):
    args = ("sweep", "--metric", "be", "--n", "1e6", "--format", "json")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    da, db = json.loads(a), json.loads(b)
    assert da["schema_version"] == "1" and da["columns"] == list(SWEEP_COLUMNS)
    assert strip_timestamp(da) == strip_timestamp(db)


def test_second_order_prediction_blank(capsys):
    _, out, _ = run(capsys, "sweep", "--scheme", "second", "--metric", "kl", "--n", "1e8")
    row = next(csv.DictReader(io.StringIO(out)))
    assert row["leading_prediction"] == "" and row["ratio_leading"] == ""
    assert row["finite_n_prediction"] != ""


def test_rate_table(capsys, tmp_path):
    dest = tmp_path / "t.csv"
    code, out, _ = run(capsys, "rate-table", "--metric", "w1", "--scheme", "classical",
                       "--n-grid", "1e8,1e12", "--out", str(dest))
    assert code == 0 and out == ""
    text = dest.read_bytes().decode()
    assert text.splitlines()[0] == ",".join(SWEEP_COLUMNS)
    assert len(text.splitlines()) == 3
    for argv in (("rate-table", "--scheme", "classical"),
                 ("rate-table", "--metric", "all"),
                 ("rate-table", "--metric", "be", "--scheme", "all")):
        assert run(capsys, *argv)[0] == 2


def test_usage_errors_name_valid_options(capsys):
    code, _, err = run(capsys, "metric", "--metric", "hellinger", "--n", "1e8")
    assert code == 2 and "be" in err and "fisher" in err
    code, _, err = run(capsys, "sweep", "--scheme", "gumbel")
    assert code == 2 and "classical" in err
    assert run(capsys, "metric", "--n", "5")[0] == 2
    assert run(capsys, "sweep", "--n-grid", "oops")[0] == 2
    assert run(capsys, "sweep", "--jobs", "0")[0] == 2
    assert run(capsys, "metric", "--route", "sideways", "--n", "1e8")[0] == 2
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "constants", "--out", "/nonexistent/dir/x.json")[0] == 2


def test_env_precedence(capsys, monkeypatch):
    monkeypatch.setenv("GUMBELRATES_SEED", "17")
    monkeypatch.setenv("GUMBELRATES_JOBS", "3")
    _, out, _ = run(capsys, "constants")
    cfg = json.loads(out)["metadata"]["config"]
    assert cfg["seed"] == 17 and cfg["jobs"] == 3
    _, out, _ = run(capsys, "constants", "--seed", "5", "--jobs", "1")
    cfg = json.loads(out)["metadata"]["config"]
    assert cfg["seed"] == 5 and cfg["jobs"] == 1
    monkeypatch.setenv("GUMBELRATES_SEED", "x")
    assert run(capsys, "constants")[0] == 2


def test_tolerance_flags_echoed(capsys):
    _, out, _ = run(capsys, "metric", "--n", "1e8", "--abs-tol", "1e-12", "--rel-tol", "1e-9")
    cfg = json.loads(out)["metadata"]["config"]
    assert cfg["abs_tol"] == 1e-12 and cfg["rel_tol"] == 1e-9
    assert run(capsys, "metric", "--n", "1e8", "--abs-tol", "-1")[0] == 2


def test_verify_failure_exits_one(capsys, monkeypatch):
    monkeypatch.setattr(cli, "run_checks", lambda *a, **k: [Check("x", False, 1.0, "never")])
    monkeypatch.setattr(cli, "hall_quadratic_forms", lambda: {})
    code, out, _ = run(capsys, "verify")
    assert code == 1 and json.loads(out)["passed"] is False


def test_verify_fast_subprocess():
    p = subprocess.run([sys.executable, "-m", "gumbelrates", "verify", "--format", "csv"],
                       capture_output=True, text=True, timeout=300)
    assert p.returncode == 0, p.stdout + p.stderr
    rows = list(csv.DictReader(io.StringIO(p.stdout)))
    assert len(rows) == 11 and all(r["passed"] == "true" for r in rows)


def test_version(capsys):
    assert run(capsys, "--version")[0] == 0
