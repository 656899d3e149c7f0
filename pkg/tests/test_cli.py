import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from hetlab.cli import main, parse_grid
from hetlab.errors import ConfigError


def _csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_solve_csv(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["solve", "--kernel", "p-power:p=2", "--potential",
                 "p-dw:p=2,alpha=1", "--out", str(out)]) == 0
    header, data = _csv(out)
    assert header == ["t", "q", "qprime", "energy_residual"]
    i = np.flatnonzero(data[:, 0] == 1.0)[0]
    assert data[i, 1] == pytest.approx(0.761594, abs=1e-6)


def test_full_precision_output(tmp_path):
    out = tmp_path / "p.csv"
    main(["solve", "--out", str(out)])
    line = out.read_text().splitlines()[150]
    assert max(len(x.lstrip("-").replace(".", "").split("e")[0]) for x in line.split(",")) >= 16


def test_stationary_anchor_exit_2(capsys):
    assert main(["solve", "--anchor", "1"]) == 2
    assert "StationaryStartError" in capsys.readouterr().err


def test_config_errors_exit_1(tmp_path):
    assert main(["solve", "--kernel", "p-power:p=0.5"]) == 1
    assert main(["solve", "--potential", "blob:alpha=1"]) == 1
    bad = tmp_path / "c.json"
    bad.write_text('{"frobnicate": 1}')
    assert main(["solve", "--config", str(bad)]) == 1


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"kernel": "p-power:p=3",
                               "potential": "p-dw:p=3,alpha=1", "t_max": 4}))
    out = tmp_path / "a.csv"
    assert main(["solve", "--config", str(cfg), "--out", str(out)]) == 0
    _, d = _csv(out)
    assert d[-1, 0] == pytest.approx(4.0)
    assert main(["solve", "--config", str(cfg), "--t-max", "2", "--out", str(out)]) == 0
    _, d = _csv(out)
    assert d[-1, 0] == pytest.approx(2.0)


def test_variational_route_matches_cauchy(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["solve", "--out", str(a)]) == 0
    assert main(["solve", "--route", "variational", "--T", "12", "--N", "4001",
                 "--out", str(b)]) == 0
    from hetlab.profiles import read_json
    pa, pb = read_json(a), read_json(b)
    assert pb.route == "variational"
    sel = (pb.t > pa.t[0]) & (pb.t < pa.t[-1])
    assert np.max(np.abs(pb.q[sel] - pa.interpolate(pb.t[sel]))) <= 5e-3


def test_verify_exit_codes(tmp_path):
    prof = tmp_path / "p.json"
    main(["solve", "--out", str(prof)])
    rep = tmp_path / "r.json"
    assert main(["verify", str(prof), "--out", str(rep)]) == 0
    assert json.loads(rep.read_text())["passed"]

    d = json.loads(prof.read_text())
    d["q"][100], d["q"][101] = d["q"][101], d["q"][100]
    corrupt = tmp_path / "bad.json"
    corrupt.write_text(json.dumps(d))
    assert main(["verify", str(corrupt), "--out", str(rep)]) == 3

    assert main(["verify", str(tmp_path / "missing.json")]) == 1
    garbage = tmp_path / "g.json"
    garbage.write_text("{")
    assert main(["verify", str(garbage)]) == 1


def test_verify_with_skipped_checks(tmp_path):
    prof = tmp_path / "m.csv"
    args = ["--kernel", "mc-truncated:L=1", "--potential", "quartic:alpha=0.1"]
    assert main(["solve", *args, "--out", str(prof)]) == 0
    rep = tmp_path / "r.json"
    assert main(["verify", str(prof), *args, "--out", str(rep)]) == 0
    checks = {c["name"]: c["status"] for c in json.loads(rep.read_text())["checks"]}
    assert checks["sandwich"] == "skipped" and checks["oracle"] == "skipped"


def _rows(capsys):
    return [json.loads(x) for x in capsys.readouterr().out.splitlines()]


def test_sweep_mc_frontier(capsys, monkeypatch):
    monkeypatch.setenv("HETLAB_THREADS", "3")
    assert main(["sweep", "--grid", "alpha=0.05:0.4:0.05;L=1",
                 "--potential", "quartic:alpha=0.1"]) == 0
    rows = _rows(capsys)
    assert [r["alpha"] for r in rows] == pytest.approx(np.arange(1, 9) * 0.05)
    for r in rows:
        assert {"alpha", "L", "max_slope", "passed", "kappa", "bound_margins"} <= set(r)
        assert r["passed"]


def test_sweep_p_family(capsys):
    assert main(["sweep", "--grid", "p=1.5,2,3"]) == 0
    rows = _rows(capsys)
    assert [r["p"] for r in rows] == [1.5, 2.0, 3.0]
    for r in rows:
        assert r["checks"]["oracle"]["status"] == "pass"
        assert r["checks"]["oracle"]["margin"] >= 0


def test_sweep_mixed_sandwich(capsys):
    assert main(["sweep", "--grid", "alpha=0.5,1,1.5", "--kernel", "mixed:p=2,q=4",
                 "--potential", "phi-dw:alpha=1"]) == 0
    for r in _rows(capsys):
        assert r["checks"]["sandwich"]["status"] == "pass"
        assert r["checks"]["sandwich"]["margin"] >= -1e-9


def test_sweep_cell_failure_does_not_abort(capsys):
    assert main(["sweep", "--grid", "alpha=0.1,1.2;L=1",
                 "--potential", "quartic:alpha=0.1"]) == 0
    rows = _rows(capsys)
    assert len(rows) == 2 and rows[0]["passed"] and not rows[1]["passed"]


def test_empty_grid():
    assert main(["sweep", "--grid", ""]) == 1
    with pytest.raises(ConfigError):
        parse_grid("alpha=")


def test_module_entry_point(tmp_path):
    out = tmp_path / "p.csv"
    r = subprocess.run([sys.executable, "-m", "hetlab", "solve", "--out", str(out)],
                       capture_output=True, text=True)
    assert r.returncode == 0 and out.exists()


def test_closed_stdout_pipe_exits_cleanly():
    proc = subprocess.Popen([sys.executable, "-m", "hetlab", "solve"],
                            stdout=subprocess.PIPE, stderr=subprocess.PIPE)
    assert proc.stdout.readline().startswith(b"t,q,")
    proc.stdout.close()
    _, err = proc.communicate(timeout=120)
    assert proc.returncode == 0
    assert b"Traceback" not in err
