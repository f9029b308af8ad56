import csv
import io
import json

import pytest

from flatholo import cli
from flatholo.config import SEED_ENV, RunConfig, load_config
from flatholo.mwbuild import SWEEP_COLUMNS


def run(argv):
    buf = io.StringIO()
    code = cli.main(argv, out=buf)
    return code, buf.getvalue()


def test_construct_report():
    code, text = run(["construct", "--chi", "1", "--eps", "0.1", "--method", "1"])
    assert code == 0
    doc = json.loads(text)
    assert doc["schema"] == 1
    assert doc["config_hash"] == RunConfig().digest()
    rep = doc["report"]
    assert rep["euler"] == 1 and rep["genus"] <= rep["bound"]
    assert "generators" not in rep


def test_construct_with_generators():
    code, text = run(["construct", "--chi", "-1", "--eps", "0.2", "--method", "3", "--generators"])
    rep = json.loads(text)["report"]
    assert code == 0 and rep["euler"] == -1
    assert len(rep["generators"]) == 2 * rep["genus"]


def test_construct_chi_zero():
    code, text = run(["construct", "--chi", "0", "--eps", "0.1"])
    assert code == 0
    assert json.loads(text)["report"]["genus"] == 0


def test_construct_usage_errors(capsys):
    assert run(["construct", "--chi", "1", "--eps", "0.9"])[0] == 1
    assert "usage error" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        run(["construct", "--chi", "1", "--eps", "0.1", "--method", "7"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        run(["construct", "--eps", "0.1"])
    assert exc.value.code == 1


def test_help_documents_exit_codes(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for line in ("0  success", "1  usage error", "2  solver failure", "3  verification failure"):
        assert line in out


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_sweep_csv_format(tmp_path):
    out = tmp_path / "s.csv"
    code, _ = run(["sweep", "--chi", "1", "--eps", "0.1", "0.05", "--methods", "1", "--out", str(out)])
    assert code == 0
    rows = read_csv(out)
    assert tuple(rows[0]) == SWEEP_COLUMNS
    assert rows[0] == ["chi", "eps", "method", "genus", "bound", "defect", "euler", "max_dist", "theta", "status"]
    assert len(rows) == 3 and all(r[-1] == "ok" for r in rows[1:])
    meta = json.loads((tmp_path / "s.csv.meta.json").read_text())
    assert meta["schema"] == 1 and meta["config_hash"] == RunConfig().digest()


def test_sweep_single_cell_equals_construct(tmp_path):
    out = tmp_path / "one.csv"
    run(["sweep", "--chi", "2", "--eps", "0.1", "--methods", "2", "--out", str(out)])
    row = dict(zip(*read_csv(out)))
    rep = json.loads(run(["construct", "--chi", "2", "--eps", "0.1", "--method", "2"])[1])["report"]
    assert int(row["genus"]) == rep["genus"]
    assert int(row["euler"]) == rep["euler"]
    assert float(row["defect"]) == rep["defect"]
    assert float(row["max_dist"]) == rep["max_dist_to_rotations"]
    assert int(row["bound"]) == rep["bound"]


def test_sweep_genus_quadruples(tmp_path):
    out = tmp_path / "q.csv"
    run(["sweep", "--chi", "1", "--eps", "0.1", "0.05", "0.025", "--methods", "1", "--out", str(out)])
    rows = [dict(zip(SWEEP_COLUMNS, r)) for r in read_csv(out)[1:]]
    g = {float(r["eps"]): int(r["genus"]) for r in rows}
    for eps in (0.1, 0.05):
        assert abs(g[eps / 2] / g[eps] - 4) <= 1.0


def test_sweep_deterministic(tmp_path, monkeypatch):
    monkeypatch.setenv(SEED_ENV, "7")
    args = ["sweep", "--chi", "1", "2", "--eps", "0.2", "0.1", "--methods", "1", "2", "3"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(args + ["--out", str(a)])
    run(args + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.csv.meta.json").read_bytes() == (tmp_path / "b.csv.meta.json").read_bytes()
    assert json.loads((tmp_path / "a.csv.meta.json").read_text())["config"]["seed"] == 7


def test_sweep_stdout_and_bad_eps():
    code, text = run(["sweep", "--chi", "1", "--eps", "0.2", "--methods", "1"])
    assert code == 0 and text.splitlines()[0] == ",".join(SWEEP_COLUMNS)
    assert run(["sweep", "--chi", "1", "--eps", "0.3"])[0] == 1


@pytest.mark.parametrize("suite", ["bi", "octagon", "eq5", "fragment"])
def test_verify_suites(suite):
    code, text = run(["verify", suite])
    assert code == 0
    assert "FAIL" not in text
    assert text.strip().splitlines()[-1].startswith("passed")


def test_verify_bi_lines():
    _, text = run(["verify", "bi"])
    assert "|BI| = 120" in text and "perfect" in text and "normally generate" in text


def test_verify_unknown_suite():
    with pytest.raises(SystemExit) as exc:
        run(["verify", "nope"])
    assert exc.value.code == 1


def test_verify_failure_exit_code(monkeypatch):
    monkeypatch.setitem(cli.SUITE_FUNCS, "bi", lambda cfg: [("forced", False)])
    assert run(["verify", "bi"])[0] == 3


def test_calibrate_writes_config(tmp_path):
    path = tmp_path / "cfg.json"
    code, text = run(["--config", str(path), "calibrate"])
    assert code == 0
    doc = json.loads(text)
    assert 1.95 <= doc["slope"] <= 2.05
    assert doc["c0"] > 0
    cfg = load_config(str(path))
    assert cfg.c0 == doc["c0"] and cfg.K == doc["K"]
    _, again = run(["--config", str(path), "calibrate"])
    assert abs(json.loads(again)["c0"] - doc["c0"]) <= 1e-6
    assert abs(json.loads(again)["K"] - doc["K"]) <= 1e-6


def test_config_file_and_env(tmp_path, monkeypatch):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"seed": 3, "dist_grid": 1024}))
    assert load_config(str(path), env={}).seed == 3
    assert load_config(str(path), env={SEED_ENV: "11"}).seed == 11
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nonsense": 1}))
    assert run(["--config", str(bad), "construct", "--chi", "1", "--eps", "0.1"])[0] == 1
    neg = tmp_path / "neg.json"
    neg.write_text(json.dumps({"defect_tol": -1}))
    assert run(["--config", str(neg), "verify", "bi"])[0] == 1


def test_config_digest_changes():
    assert RunConfig().digest() != RunConfig(seed=1).digest()
    assert RunConfig().digest() == RunConfig().digest()
