"""End-to-end CLI behaviour: exit codes, files on disk, determinism."""

from __future__ import annotations

import hashlib
import json

import pytest

from farsvm import InfeasibleToleranceWarning, load_features, load_model
from farsvm.cli import main


def _sha(path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _tree_hashes(root) -> dict:
    return {p.name: _sha(p) for p in sorted(root.iterdir()) if p.is_file()}


@pytest.fixture(scope="module")
def data2(tmp_path_factory):
    """Two-cell synthetic set at the full per-cell sample count."""
    out = tmp_path_factory.mktemp("data2") / "set"
    assert main(["generate", "--seed", "0", "--cells", "2",
                 "--samples", str(2**17), "--out", str(out)]) == 0
    return out


@pytest.fixture(scope="module")
def feats6(tmp_path_factory):
    """Feature CSV for a small six-cell set (449 segments per cell)."""
    root = tmp_path_factory.mktemp("feats6")
    data = root / "data"
    assert main(["generate", "--seed", "11", "--cells", "6",
                 "--samples", str(2**15), "--out", str(data)]) == 0
    out = root / "features.csv"
    assert main(["extract", "--data", str(data), "--out", str(out)]) == 0
    return out


@pytest.fixture(scope="module")
def model6(tmp_path_factory, feats6):
    """A converged training run on the six-cell features, default bounds."""
    root = tmp_path_factory.mktemp("model6")
    model = root / "model.json"
    trace = root / "trace.json"
    rc = main(["train", "--features", str(feats6), "--pf", "0.05",
               "--eta", "0.01", "--out-model", str(model),
               "--out-trace", str(trace)])
    return rc, model, trace


# ---------------------------------------------------------------------------
# generate
# ---------------------------------------------------------------------------

def test_generate_writes_cells_and_meta(tmp_path, capsys):
    out = tmp_path / "set"
    rc = main(["generate", "--seed", "1", "--cells", "10",
               "--samples", "4096", "--out", str(out)])
    assert rc == 0
    assert "10 cells" in capsys.readouterr().out
    assert len(list(out.glob("cell_*.csv"))) == 10
    meta = json.loads((out / "meta.json").read_text())
    assert "primary_cell" in meta


def test_generate_rejects_nan_scr(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--scr-db", "nan", "--cells", "2",
              "--samples", "4096", "--out", str(tmp_path / "x")])
    assert exc.value.code == 2
    assert "--scr-db" in capsys.readouterr().err


def test_generate_is_reproducible(tmp_path):
    args = ["generate", "--seed", "5", "--cells", "2", "--samples", "4096"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    hashes_a = _tree_hashes(tmp_path / "a")
    assert hashes_a == _tree_hashes(tmp_path / "b")
    assert set(hashes_a) == {"cell_0.csv", "cell_1.csv", "meta.json"}


# ---------------------------------------------------------------------------
# extract
# ---------------------------------------------------------------------------

def test_extract_row_count_and_determinism(data2, tmp_path, capsys):
    out = tmp_path / "features.csv"
    assert main(["extract", "--data", str(data2), "--out", str(out)]) == 0
    assert "wrote 3970 feature vectors" in capsys.readouterr().out
    lines = out.read_text().splitlines()
    assert lines[0] == "tie,the,fpar,label,source_cell,start_index"
    assert len(lines) == 3971          # 1985 segments per cell, two cells

    again = tmp_path / "again.csv"
    assert main(["extract", "--data", str(data2), "--out", str(again)]) == 0
    assert _sha(out) == _sha(again)


def test_extract_single_bin_zeroes_the_entropy(tmp_path):
    data = tmp_path / "set"
    assert main(["generate", "--seed", "2", "--cells", "2",
                 "--samples", "4096", "--out", str(data)]) == 0
    out = tmp_path / "features.csv"
    assert main(["extract", "--data", str(data), "--out", str(out),
                 "--k-bins", "1"]) == 0
    vectors = load_features(out)
    assert len(vectors) == 2           # window == cell length: one segment each
    assert all(v.tie == 0.0 for v in vectors)


# ---------------------------------------------------------------------------
# train
# ---------------------------------------------------------------------------

def test_train_converges_and_writes_artifacts(model6, capsys):
    rc, model_path, trace_path = model6
    assert rc == 0
    model = load_model(model_path)
    assert model.training_meta.converged
    trace = json.loads(trace_path.read_text())
    assert trace["converged"] is True
    assert trace["model_ref"] == str(model_path)
    # Flags that were omitted must land on their documented defaults.
    assert trace["target"]["beta_h"] == 2.0
    assert trace["target"]["beta_l"] == 0.0
    assert trace["target"]["beta1"] == 1.0
    assert trace["target"]["max_iters"] == 50
    assert trace["target"]["p_f"] == 0.05
    final = trace["iterations"][-1]
    assert abs(final["p_F"] - 0.05) <= 0.01


def test_train_requires_features(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["train", "--pf", "0.1"])
    assert exc.value.code == 2
    assert "--features is required" in capsys.readouterr().err


def test_train_missing_feature_file(tmp_path, capsys):
    rc = main(["train", "--features", str(tmp_path / "nope.csv"),
               "--pf", "0.1"])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_train_budget_exhaustion_exits_1(feats6, tmp_path):
    model = tmp_path / "model.json"
    trace_path = tmp_path / "trace.json"
    with pytest.warns(InfeasibleToleranceWarning):
        rc = main(["train", "--features", str(feats6),
                   "--pf", "0.0123456789", "--eta", "1e-12",
                   "--max-iters", "4", "--out-model", str(model),
                   "--out-trace", str(trace_path)])
    assert rc == 1
    trace = json.loads(trace_path.read_text())
    assert trace["converged"] is False
    assert len(trace["iterations"]) == 4
    assert model.exists()              # best-effort model is still usable


# ---------------------------------------------------------------------------
# detect
# ---------------------------------------------------------------------------

def test_detect_writes_decisions(model6, feats6, tmp_path, capsys):
    _, model_path, _ = model6
    out = tmp_path / "decisions.csv"
    rc = main(["detect", "--model", str(model_path),
               "--features", str(feats6), "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "decision,margin,source_cell,start_index"
    assert len(lines) == 1 + 6 * 449
    for line in lines[1:]:
        decision, margin, cell, start = line.split(",")
        assert decision in ("-1", "1")
        float(margin)
        int(cell), int(start)


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

def test_evaluate_sweeps_and_writes_baseline(feats6, tmp_path, capsys):
    report_path = tmp_path / "report.json"
    roc_path = tmp_path / "roc.csv"
    rc = main(["evaluate", "--features", str(feats6),
               "--pf-grid", "0.02,0.05,0.1", "--eta", "0.01",
               "--baseline", "hurst",
               "--out-report", str(report_path), "--out-roc", str(roc_path)])
    assert rc == 0
    roc_lines = roc_path.read_text().splitlines()
    assert roc_lines[0] == "p_f,p_d,converged"
    assert len(roc_lines) == 4
    report = json.loads(report_path.read_text())
    assert [p["p_f"] for p in report["roc_points"]] == [0.02, 0.05, 0.1]
    assert report["p_d"] == report["roc_points"][-1]["p_d"]
    assert report["target_p_f"] == 0.1

    base_report = tmp_path / "report_baseline.json"
    base_roc = tmp_path / "roc_baseline.csv"
    assert base_report.exists() and base_roc.exists()
    base = json.loads(base_report.read_text())
    assert len(base["roc_points"]) == 3
    assert base["beta0_final"] is None          # not a trained model
    assert len(base_roc.read_text().splitlines()) == 4


# ---------------------------------------------------------------------------
# config file merging
# ---------------------------------------------------------------------------

def test_config_provides_defaults_but_flags_win(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 3, "cells": 2, "samples": 4096}))
    base = ["generate", "--config", str(cfg)]
    assert main(base + ["--seed", "5", "--out", str(tmp_path / "a")]) == 0
    assert main(["generate", "--seed", "5", "--cells", "2",
                 "--samples", "4096", "--out", str(tmp_path / "b")]) == 0
    assert main(base + ["--out", str(tmp_path / "c")]) == 0
    assert _tree_hashes(tmp_path / "a") == _tree_hashes(tmp_path / "b")
    assert _tree_hashes(tmp_path / "a") != _tree_hashes(tmp_path / "c")


def test_config_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sample": 4096}))
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--config", str(cfg), "--out", str(tmp_path / "x")])
    assert exc.value.code == 2
    assert "unknown keys" in capsys.readouterr().err


def test_config_rejects_bad_json(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{broken")
    with pytest.raises(SystemExit) as exc:
        main(["generate", "--config", str(cfg), "--out", str(tmp_path / "x")])
    assert exc.value.code == 2
