import csv
import json

import numpy as np
import pytest
from click.testing import CliRunner

from fatou_foliations import scenario
from fatou_foliations.cli import MAX_RESOLUTION, grid_export, main
from fatou_foliations.errors import ConfigError, ResolutionTooLarge

FAST = ["example215-2ib", "thm212-not-closed", "remark3132-3", "pseudogroup-rotations"]

GOOD = """
schema_version: 1
scenarios:
  - id: mine
    kind: thm26
    foliation: {lambda: -1, mu: 1, ambient: affine}
    region: {kind: ComplementOfAxes, reach: 0.001}
    form: {type: Nu, alpha: -1}
    family: {type: AnnulusProduct}
    expected: %s
"""


def _run(args, **kw):
    return CliRunner().invoke(main, args, catch_exceptions=False, **kw)


def test_run_subset_ok(tmp_path):
    r = _run(["run", "--out-dir", str(tmp_path), *sum((["--only", i] for i in FAST), [])])
    assert r.exit_code == 0, r.output
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["all_passed"] and len(summary["scenarios"]) == len(FAST)
    rep = json.loads((tmp_path / "thm212-not-closed.json").read_text())
    assert rep["verdict"] == "NotClosed"


def test_run_expected_mismatch_exits_1(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(GOOD % "Inconclusive")
    r = _run(["run", "--config", str(cfg), "--out-dir", str(tmp_path / "o")])
    assert r.exit_code == 1
    assert "FAIL mine: FatouSubset" in r.output
    cfg.write_text(GOOD % "FatouSubset")
    assert _run(["run", "--config", str(cfg), "--out-dir", str(tmp_path / "o")]).exit_code == 0


@pytest.mark.parametrize("text", [
    (GOOD % "FatouSubset").replace("lambda: -1", "lambda: 0"),
    (GOOD % "FatouSubset").replace("expected:", "bogus: 1\n    expected:"),
    (GOOD % "FatouSubset").replace("kind: thm26", "kind: nonsense"),
    "scenarios: [",
])
def test_bad_config_exits_2(tmp_path, text):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(text)
    r = _run(["run", "--config", str(cfg), "--out-dir", str(tmp_path / "o")])
    assert r.exit_code == 2
    with pytest.raises(ConfigError):
        scenario.parse_config(text)


def test_bad_cli_arguments_exit_2(tmp_path):
    assert _run(["run", "--only", "nope", "--out-dir", str(tmp_path)]).exit_code == 2
    assert _run(["run", "--tolerance", "weird=1", "--out-dir", str(tmp_path)]).exit_code == 2
    assert _run(["run", "--config", str(tmp_path / "missing.yaml")]).exit_code == 2
    assert _run(["grid", "--quantity", "f_value", "--resolution", str(MAX_RESOLUTION + 1),
                 "--out-dir", str(tmp_path)]).exit_code == 2
    assert _run(["classify", "--alpha", "0"]).exit_code == 2
    assert _run(["holonomy", "--alpha", "zzz"]).exit_code == 2


def test_timeout_reported(tmp_path):
    r = _run(["run", "--only", "example215-2ia", "--timeout", "0.001", "--out-dir", str(tmp_path)])
    assert r.exit_code == 1
    assert json.loads((tmp_path / "example215-2ia.json").read_text())["verdict"] == "Timeout"


def test_grid_export_f_value(tmp_path):
    p = grid_export("f_value", tmp_path / "f.csv", resolution=5, lo=0, hi=2)
    with open(p) as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    assert rows[0] == ["abs_x", "abs_y", "f"]
    body = np.array(rows[1:], dtype=float)
    assert body.shape == (25, 3)
    a, b = body[:, 0], body[:, 1]
    assert np.allclose(body[:, 2], a**2 * b**2 / (1 + a**2 + b**2) ** 3)
    assert body[6, 0] == 0.5 and body[6, 1] == 0.5
    meta = json.loads((tmp_path / "f.csv.meta.json").read_text())
    assert meta["resolution"] == 5
    with pytest.raises(ResolutionTooLarge):
        grid_export("f_value", tmp_path / "g.csv", resolution=MAX_RESOLUTION + 1)


def test_grid_env_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("FATOU_OUT_DIR", str(tmp_path))
    r = _run(["grid", "--quantity", "multiplier_field", "--resolution", "4"])
    assert r.exit_code == 0
    assert (tmp_path / "multiplier_field.csv").exists()


def test_classify_and_holonomy_commands():
    r = _run(["classify", "--alpha", "0.5"])
    assert r.exit_code == 0 and "z1 z2" in json.loads(r.output)["fatou"]
    r = _run(["holonomy", "--alpha", "1j", "--axis", "first"])
    d = json.loads(r.output)
    assert r.exit_code == 0
    assert d["multiplier_abs"] == pytest.approx(1.867442e-3, rel=1e-6)
    r = _run(["counterexamples"])
    assert r.exit_code == 0 and json.loads(r.output)["no_invariant_metric"]["is_hyperbolic"]


def test_run_deterministic(tmp_path):
    outs = []
    for k in range(2):
        d = tmp_path / str(k)
        _run(["run", "--out-dir", str(d), "--seed", "7", *sum((["--only", i] for i in FAST), [])])
        outs.append({p.name: scenario.strip_timing(p.read_text()) for p in sorted(d.glob("*.json"))})
    assert outs[0] == outs[1]
