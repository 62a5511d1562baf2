"""Train/test protocol: splitting, detection probability, ROC sweeps, baseline.

The split follows the detector's experimental protocol: *all* clutter vectors
train (the FAR controller needs every clutter sample it can get), targets are
shuffled and divided, and the test partition therefore contains targets only
— detection probability is the single test-side metric.

The reference point for comparisons is a single-feature detector thresholding
the Hurst exponent: the threshold is placed at the empirical (1 - p_f)
quantile of the training clutter's Hurst values, so its training FAR matches
the requested operating point by construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import (
    EmptyTestSet,
    FarSvmError,
    InvalidParameter,
    NoClutter,
    NoTargets,
)
from .far_controller import FarTarget, fit_with_far
from .signal_model import Label, Polarization
from .svm_core import KernelConfig, SvmModel, decide_batch


class ClutterPolicy(Enum):
    ALL_TO_TRAIN = "all_to_train"


@dataclass(frozen=True)
class SplitSpec:
    target_train_fraction: float = 0.5
    seed: int = 0
    clutter_policy: ClutterPolicy = ClutterPolicy.ALL_TO_TRAIN

    def __post_init__(self) -> None:
        if not (0.0 < self.target_train_fraction < 1.0):
            raise InvalidParameter("target_train_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class RocPoint:
    p_f: float                 # requested FAR
    p_d: float                 # detection probability on the test targets
    converged: bool
    p_F_train: float = math.nan   # achieved training FAR
    beta0: float = math.nan
    error: str | None = None


@dataclass(eq=False)
class DetectorReport:
    p_d: float
    p_F_train: float
    target_p_f: float
    beta0_final: float
    beta1: float
    dataset_name: str
    polarization: Polarization
    roc_points: list[RocPoint]


def split(vectors, spec: SplitSpec):
    """Deterministic split: all clutter to train, targets divided by seed.

    Targets are shuffled with the spec's seed; the first
    floor(fraction * count) go to train, the rest form the test set.
    """
    targets = [v for v in vectors if v.label is Label.TARGET]
    clutter = [v for v in vectors if v.label is Label.CLUTTER]
    if not targets:
        raise NoTargets("split requires at least one target vector")
    if not clutter:
        raise NoClutter("split requires at least one clutter vector")
    order = np.random.default_rng(spec.seed).permutation(len(targets))
    n_train = int(spec.target_train_fraction * len(targets))
    train_targets = [targets[k] for k in order[:n_train]]
    test_targets = [targets[k] for k in order[n_train:]]
    return clutter + train_targets, test_targets


def detection_probability(model: SvmModel, test) -> float:
    """Fraction of target-labelled test vectors classified as target."""
    targets = [v for v in test if v.label is Label.TARGET]
    if not targets:
        raise EmptyTestSet("no target vectors to score")
    labels, _ = decide_batch(model, targets)
    return float(np.mean(labels == 1))


def roc_sweep(
    training,
    test,
    kernel: KernelConfig,
    p_f_grid,
    eta: float = 1e-4,
    beta1: float = 1.0,
    beta_h: float = 2.0,
    beta_l: float = 0.0,
    max_iters: int = 50,
    kkt_tol: float = 1e-3,
    dataset_name: str = "",
    polarization: Polarization = Polarization.HH,
) -> DetectorReport:
    """Run the FAR controller per grid point and score each model.

    Failures at individual points are recorded on their RocPoint and the
    sweep continues.  The report's top-level operating point is the last
    (largest-p_f) grid point.
    """
    grid = sorted(float(p) for p in p_f_grid)
    if not grid or grid[0] <= 0.0 or grid[-1] >= 1.0:
        raise InvalidParameter("p_f grid values must lie in (0, 1)")
    points: list[RocPoint] = []
    for p_f in grid:
        target = FarTarget(
            p_f=p_f, eta=eta, beta_h=beta_h, beta_l=beta_l,
            beta1=beta1, max_iters=max_iters,
        )
        try:
            trace = fit_with_far(training, kernel, target, kkt_tol=kkt_tol)
            points.append(
                RocPoint(
                    p_f=p_f,
                    p_d=detection_probability(trace.final_model, test),
                    converged=trace.converged,
                    p_F_train=trace.p_F_final,
                    beta0=trace.beta0_final,
                )
            )
        except FarSvmError as exc:
            points.append(
                RocPoint(p_f=p_f, p_d=math.nan, converged=False, error=str(exc))
            )
    last = points[-1]
    return DetectorReport(
        p_d=last.p_d,
        p_F_train=last.p_F_train,
        target_p_f=last.p_f,
        beta0_final=last.beta0,
        beta1=beta1,
        dataset_name=dataset_name,
        polarization=polarization,
        roc_points=points,
    )


def hurst_threshold_baseline(
    training,
    test,
    p_f: float,
    dataset_name: str = "",
    polarization: Polarization = Polarization.HH,
) -> DetectorReport:
    """Single-feature reference detector: threshold on the Hurst exponent.

    The threshold sits at the empirical (1 - p_f) quantile of training
    clutter Hurst values; targets score a detection when their value exceeds
    it (target returns are the more persistent process).
    """
    if not (0.0 <= p_f <= 1.0):
        raise InvalidParameter("p_f must lie in [0, 1]")
    clutter_the = np.array(
        [v.the for v in training if v.label is Label.CLUTTER]
    )
    if clutter_the.size == 0:
        raise NoClutter("baseline needs training clutter vectors")
    test_the = np.array([v.the for v in test if v.label is Label.TARGET])
    if test_the.size == 0:
        raise EmptyTestSet("no target vectors to score")
    if p_f >= 1.0:
        threshold = -math.inf
    elif p_f <= 0.0:
        threshold = float(clutter_the.max())
    else:
        # 'higher' keeps the training exceedance rate at or below p_f.
        threshold = float(np.quantile(clutter_the, 1.0 - p_f, method="higher"))
    p_F_train = float(np.mean(clutter_the > threshold))
    p_d = float(np.mean(test_the > threshold))
    point = RocPoint(p_f=p_f, p_d=p_d, converged=True, p_F_train=p_F_train)
    return DetectorReport(
        p_d=p_d,
        p_F_train=p_F_train,
        target_p_f=p_f,
        beta0_final=math.nan,
        beta1=math.nan,
        dataset_name=dataset_name,
        polarization=polarization,
        roc_points=[point],
    )


def average_roc(reports) -> list[RocPoint]:
    """Per-dataset averaging: mean p_d at each grid position, not pooled.

    All reports must share the same p_f grid (same length and values).
    """
    reports = list(reports)
    if not reports:
        raise InvalidParameter("average_roc needs at least one report")
    grids = [[p.p_f for p in r.roc_points] for r in reports]
    if any(g != grids[0] for g in grids[1:]):
        raise InvalidParameter("reports disagree on the p_f grid")
    out = []
    for idx, p_f in enumerate(grids[0]):
        column = [r.roc_points[idx] for r in reports]
        out.append(
            RocPoint(
                p_f=p_f,
                p_d=float(np.mean([p.p_d for p in column])),
                converged=all(p.converged for p in column),
                p_F_train=float(np.mean([p.p_F_train for p in column])),
            )
        )
    return out


# ---------------------------------------------------------------------------
# Report persistence
# ---------------------------------------------------------------------------

def _json_safe(value: float):
    return None if (isinstance(value, float) and math.isnan(value)) else value


def save_report(report: DetectorReport, path: str | Path) -> None:
    doc = {
        "p_d": _json_safe(report.p_d),
        "p_F_train": _json_safe(report.p_F_train),
        "target_p_f": report.target_p_f,
        "beta0_final": _json_safe(report.beta0_final),
        "beta1": _json_safe(report.beta1),
        "dataset_name": report.dataset_name,
        "polarization": report.polarization.value,
        "roc_points": [
            {
                "p_f": p.p_f,
                "p_d": _json_safe(p.p_d),
                "converged": p.converged,
            }
            for p in report.roc_points
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def save_roc_csv(points, path: str | Path) -> None:
    lines = ["p_f,p_d,converged"]
    for p in points:
        lines.append(f"{p.p_f},{p.p_d},{str(p.converged).lower()}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
