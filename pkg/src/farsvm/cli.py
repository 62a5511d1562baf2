"""Command-line front end: generate | extract | train | detect | evaluate.

Every command is deterministic given its flags; randomness only enters
through explicit seeds.  ``--config file.json`` pre-loads parameters (keys
are the flag names with underscores); flags given on the command line win.

Exit codes: 0 success, 1 runtime/convergence failure, 2 usage or parameter
error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .errors import FarSvmError
from .evaluation import (
    DetectorReport,
    SplitSpec,
    hurst_threshold_baseline,
    roc_sweep,
    save_report,
    save_roc_csv,
    split,
)
from .far_controller import FarTarget, fit_with_far, save_trace
from .features import (
    FeatureConfig,
    extract_batch,
    load_features,
    save_features,
)
from .signal_model import (
    FileFormat,
    Polarization,
    load_dataset,
    save_dataset,
    segment_dataset,
    synthesize_dataset,
)
from .svm_core import (
    KernelConfig,
    decide_batch,
    load_model,
    save_model,
)

_DEFAULTS: dict[str, dict] = {
    "generate": {
        "seed": 0,
        "scr_db": 10.0,
        "cells": 14,
        "samples": 2**17,
        "clutter_shape": 1.0,
        "polarization": "HH",
        "format": "csv",
        "out": None,
    },
    "extract": {
        "data": None,
        "out": None,
        "format": "csv",
        "d": 64,
        "window": 4096,
        "k_bins": 100,
        "tau_grid": None,
    },
    "train": {
        "features": None,
        "pf": None,
        "eta": 1e-4,
        "beta1": 1.0,
        "beta_h": 2.0,
        "beta_l": 0.0,
        "max_iters": 50,
        "delta": 1.0,
        "kernel_form": "paper",
        "kkt_tol": 1e-3,
        "out_model": "model.json",
        "out_trace": "trace.json",
    },
    "detect": {
        "model": None,
        "features": None,
        "out": "decisions.csv",
    },
    "evaluate": {
        "features": None,
        "pf_grid": "0.001,0.01,0.1",
        "eta": 1e-4,
        "beta1": 1.0,
        "beta_h": 2.0,
        "beta_l": 0.0,
        "max_iters": 50,
        "delta": 1.0,
        "kernel_form": "paper",
        "kkt_tol": 1e-3,
        "split_fraction": 0.5,
        "split_seed": 0,
        "baseline": "none",
        "dataset_name": "",
        "polarization": "HH",
        "out_report": "report.json",
        "out_roc": "roc.csv",
    },
}


def _float_list(text: str) -> list[float]:
    return [float(part) for part in str(text).split(",") if part.strip()]


def _int_list(text: str) -> list[int]:
    return [int(part) for part in str(text).split(",") if part.strip()]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="farsvm",
        description=(
            "FAR-controllable sea-surface small-target detector: synthetic "
            "data, 3-D features, weighted SVM training, evaluation."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    s = argparse.SUPPRESS

    g = sub.add_parser("generate", help="synthesize a multi-cell dataset")
    g.add_argument("--seed", type=int, default=s)
    g.add_argument("--scr-db", type=float, default=s,
                   help="signal-to-clutter ratio in dB; -inf for no target")
    g.add_argument("--cells", type=int, default=s)
    g.add_argument("--samples", type=int, default=s)
    g.add_argument("--clutter-shape", type=float, default=s,
                   help="Gamma texture shape (smaller = heavier tails)")
    g.add_argument("--polarization", choices=[p.value for p in Polarization],
                   default=s)
    g.add_argument("--format", choices=[f.value for f in FileFormat], default=s)
    g.add_argument("--out", default=s, help="output directory")

    e = sub.add_parser("extract", help="segment cells and compute features")
    e.add_argument("--data", default=s, help="dataset directory")
    e.add_argument("--out", default=s, help="feature CSV path")
    e.add_argument("--format", choices=[f.value for f in FileFormat], default=s)
    e.add_argument("--d", type=int, default=s, help="segment step (default 64)")
    e.add_argument("--window", type=int, default=s,
                   help="segment length (default 4096)")
    e.add_argument("--k-bins", type=int, default=s)
    e.add_argument("--tau-grid", default=s,
                   help="comma-separated sub-period lengths")

    t = sub.add_parser("train", help="fit the detector at a target FAR")
    t.add_argument("--features", default=s, help="training feature CSV")
    t.add_argument("--pf", type=float, default=s, help="target FAR in (0,1)")
    t.add_argument("--eta", type=float, default=s)
    t.add_argument("--beta1", type=float, default=s)
    t.add_argument("--beta-h", type=float, default=s)
    t.add_argument("--beta-l", type=float, default=s)
    t.add_argument("--max-iters", type=int, default=s)
    t.add_argument("--delta", type=float, default=s)
    t.add_argument("--kernel-form", choices=["paper", "gaussian"], default=s)
    t.add_argument("--kkt-tol", type=float, default=s)
    t.add_argument("--out-model", default=s)
    t.add_argument("--out-trace", default=s)

    d = sub.add_parser("detect", help="classify feature vectors with a model")
    d.add_argument("--model", default=s)
    d.add_argument("--features", default=s)
    d.add_argument("--out", default=s)

    v = sub.add_parser("evaluate", help="split, sweep the FAR grid, report")
    v.add_argument("--features", default=s)
    v.add_argument("--pf-grid", default=s, help="comma-separated FAR targets")
    v.add_argument("--eta", type=float, default=s)
    v.add_argument("--beta1", type=float, default=s)
    v.add_argument("--beta-h", type=float, default=s)
    v.add_argument("--beta-l", type=float, default=s)
    v.add_argument("--max-iters", type=int, default=s)
    v.add_argument("--delta", type=float, default=s)
    v.add_argument("--kernel-form", choices=["paper", "gaussian"], default=s)
    v.add_argument("--kkt-tol", type=float, default=s)
    v.add_argument("--split-fraction", type=float, default=s)
    v.add_argument("--split-seed", type=int, default=s)
    v.add_argument("--baseline", choices=["none", "hurst"], default=s)
    v.add_argument("--dataset-name", default=s)
    v.add_argument("--polarization", choices=[p.value for p in Polarization],
                   default=s)
    v.add_argument("--out-report", default=s)
    v.add_argument("--out-roc", default=s)

    for p in (g, e, t, d, v):
        p.add_argument("--config", default=s,
                       help="JSON file of parameters; explicit flags win")
    return parser


def _merge_params(command: str, args: argparse.Namespace,
                  parser: argparse.ArgumentParser) -> dict:
    params = dict(_DEFAULTS[command])
    given = {k: v for k, v in vars(args).items() if k != "command"}
    config_path = given.pop("config", None)
    if config_path is not None:
        try:
            loaded = json.loads(Path(config_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            parser.error(f"--config: {exc}")
        unknown = set(loaded) - set(params)
        if unknown:
            parser.error(f"--config: unknown keys {sorted(unknown)}")
        params.update(loaded)
    params.update(given)
    return params


def _require(params: dict, key: str, parser: argparse.ArgumentParser):
    if params.get(key) is None:
        parser.error(f"--{key.replace('_', '-')} is required")
    return params[key]


def _cmd_generate(params: dict, parser: argparse.ArgumentParser) -> int:
    scr_db = float(params["scr_db"])
    if math.isnan(scr_db):
        parser.error("--scr-db must not be NaN")
    out = Path(_require(params, "out", parser))
    dataset = synthesize_dataset(
        seed=int(params["seed"]),
        scr_db=scr_db,
        n_cells=int(params["cells"]),
        n_samples=int(params["samples"]),
        clutter_shape=float(params["clutter_shape"]),
        polarization=Polarization(params["polarization"]),
    )
    save_dataset(dataset, out, FileFormat(params["format"]))
    print(f"wrote {len(dataset.cells)} cells to {out}")
    return 0


def _cmd_extract(params: dict, parser: argparse.ArgumentParser) -> int:
    data = Path(_require(params, "data", parser))
    out = Path(_require(params, "out", parser))
    dataset = load_dataset(data, FileFormat(params["format"]))
    segments = segment_dataset(
        dataset, d=int(params["d"]), window=int(params["window"])
    )
    tau = params["tau_grid"]
    config = FeatureConfig(
        k_bins=int(params["k_bins"]),
        tau_grid=tuple(_int_list(tau)) if tau else None,
    )
    vectors = extract_batch(segments, config)
    save_features(vectors, out)
    print(f"wrote {len(vectors)} feature vectors to {out}")
    return 0


def _cmd_train(params: dict, parser: argparse.ArgumentParser) -> int:
    features = Path(_require(params, "features", parser))
    pf = _require(params, "pf", parser)
    vectors = load_features(features)
    target = FarTarget(
        p_f=float(pf),
        eta=float(params["eta"]),
        beta_h=float(params["beta_h"]),
        beta_l=float(params["beta_l"]),
        beta1=float(params["beta1"]),
        max_iters=int(params["max_iters"]),
    )
    kernel = KernelConfig(
        delta=float(params["delta"]), form=params["kernel_form"]
    )
    trace = fit_with_far(
        vectors, kernel, target, kkt_tol=float(params["kkt_tol"])
    )
    out_model = str(params["out_model"])
    save_model(trace.final_model, out_model)
    save_trace(trace, params["out_trace"], model_ref=out_model)
    print(
        f"{'converged' if trace.converged else 'best effort'} after "
        f"{len(trace.iterations)} trainings: beta0={trace.beta0_final:.6g}, "
        f"P_F={trace.p_F_final:.6g}"
    )
    return 0 if trace.converged else 1


def _cmd_detect(params: dict, parser: argparse.ArgumentParser) -> int:
    model = load_model(_require(params, "model", parser))
    vectors = load_features(_require(params, "features", parser))
    out = Path(_require(params, "out", parser))
    labels, margins = decide_batch(model, vectors)
    lines = ["decision,margin,source_cell,start_index"]
    for v, label, margin in zip(vectors, labels, margins):
        lines.append(f"{label},{margin:.17g},{v.source_cell},{v.start_index}")
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(labels)} decisions to {out}")
    return 0


def _baseline_path(path: Path) -> Path:
    return path.with_name(f"{path.stem}_baseline{path.suffix}")


def _cmd_evaluate(params: dict, parser: argparse.ArgumentParser) -> int:
    features = Path(_require(params, "features", parser))
    vectors = load_features(features)
    grid = _float_list(params["pf_grid"])
    spec = SplitSpec(
        target_train_fraction=float(params["split_fraction"]),
        seed=int(params["split_seed"]),
    )
    training, test = split(vectors, spec)
    kernel = KernelConfig(
        delta=float(params["delta"]), form=params["kernel_form"]
    )
    polarization = Polarization(params["polarization"])
    report = roc_sweep(
        training, test, kernel, grid,
        eta=float(params["eta"]),
        beta1=float(params["beta1"]),
        beta_h=float(params["beta_h"]),
        beta_l=float(params["beta_l"]),
        max_iters=int(params["max_iters"]),
        kkt_tol=float(params["kkt_tol"]),
        dataset_name=params["dataset_name"],
        polarization=polarization,
    )
    out_report = Path(params["out_report"])
    out_roc = Path(params["out_roc"])
    save_report(report, out_report)
    save_roc_csv(report.roc_points, out_roc)
    print(f"wrote {out_report} and {out_roc}")
    if params["baseline"] == "hurst":
        base_points = []
        for p_f in sorted(grid):
            base = hurst_threshold_baseline(
                training, test, p_f,
                dataset_name=params["dataset_name"],
                polarization=polarization,
            )
            base_points.append(base.roc_points[0])
        last = base_points[-1]
        base_report = DetectorReport(
            p_d=last.p_d,
            p_F_train=last.p_F_train,
            target_p_f=last.p_f,
            beta0_final=math.nan,
            beta1=math.nan,
            dataset_name=params["dataset_name"],
            polarization=polarization,
            roc_points=base_points,
        )
        save_report(base_report, _baseline_path(out_report))
        save_roc_csv(base_points, _baseline_path(out_roc))
        print(f"wrote baseline curve to {_baseline_path(out_roc)}")
    return 0


_HANDLERS = {
    "generate": _cmd_generate,
    "extract": _cmd_extract,
    "train": _cmd_train,
    "detect": _cmd_detect,
    "evaluate": _cmd_evaluate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    params = _merge_params(args.command, args, parser)
    try:
        return _HANDLERS[args.command](params, parser)
    except FarSvmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - unexpected runtime failure
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
