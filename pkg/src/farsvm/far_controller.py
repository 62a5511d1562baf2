"""Bisection on the clutter penalty to hit a requested false-alarm rate.

Raising the clutter penalty beta0 makes clutter-side margin violations more
expensive and pushes the empirical training FAR down; the controller
exploits that trend with plain bisection on beta0 inside [beta_l, beta_h],
holding beta1 fixed.  FAR is measured on the *training* clutter vectors —
the quantity the procedure defines and controls; a held-out FAR is a
different (uncontrolled) statistic.

The printed procedure fixes the bracket at [0, 2], which silently fails when
the needed penalty exceeds 2 (low targets at low clutter-to-signal contrast
routinely need beta0 > 2).  Before bisecting we probe the upper end and
double beta_h — up to 2**10 — until the bracket actually straddles the
target; every probe is a real training and counts against ``max_iters``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    InfeasibleToleranceWarning,
    InvalidParameter,
    NoClutterSamples,
)
from .features import fit_normalization, vectors_to_arrays
from .signal_model import Label
from .svm_core import (
    KernelCache,
    KernelConfig,
    SvmModel,
    TrainConfig,
    decide_batch,
    train_arrays,
)

BETA_H_CEILING = 2.0**10


@dataclass(frozen=True)
class FarTarget:
    """Requested operating point and bisection bounds."""

    p_f: float
    eta: float = 1e-4
    beta_h: float = 2.0
    beta_l: float = 0.0
    beta1: float = 1.0
    max_iters: int = 50

    def __post_init__(self) -> None:
        for name in ("p_f", "eta", "beta_h", "beta_l", "beta1"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (0.0 < self.p_f < 1.0):
            raise InvalidParameter("p_f must lie in (0, 1)")
        if not self.eta > 0.0:
            raise InvalidParameter("eta must be positive")
        if not self.beta_l >= 0.0:
            raise InvalidParameter("beta_l must be non-negative")
        if not self.beta_h > self.beta_l:
            raise InvalidParameter("beta_h must exceed beta_l")
        if not self.beta1 > 0.0:
            raise InvalidParameter("beta1 must be positive")
        if self.max_iters < 1:
            raise InvalidParameter("max_iters must be >= 1")


@dataclass(frozen=True)
class IterationRecord:
    beta0: float
    p_F: float
    n_clutter_errors: int


@dataclass(eq=False)
class ControllerTrace:
    target: FarTarget
    iterations: list[IterationRecord]
    converged: bool
    final_model: SvmModel

    @property
    def beta0_final(self) -> float:
        return self.final_model.training_meta.beta0

    @property
    def p_F_final(self) -> float:
        beta0 = self.final_model.training_meta.beta0
        for record in reversed(self.iterations):
            if record.beta0 == beta0:
                return record.p_F
        raise InvalidParameter("trace does not cover its own final model")


def _clutter_counts(model: SvmModel, clutter_X: np.ndarray) -> int:
    labels, _ = decide_batch(model, clutter_X)
    return int(np.sum(labels == 1))


def empirical_far(model: SvmModel, training) -> float:
    """Fraction of clutter-labelled training vectors classified as target."""
    clutter = [v for v in training if v.label is Label.CLUTTER]
    if not clutter:
        raise NoClutterSamples("no clutter vectors to measure a FAR on")
    X, _ = vectors_to_arrays(clutter)
    return _clutter_counts(model, X) / len(clutter)


def fit_with_far(
    training,
    kernel: KernelConfig,
    target: FarTarget,
    kkt_tol: float = 1e-3,
    max_passes: int | None = None,
    cache_mb: float | None = None,
) -> ControllerTrace:
    """Train repeatedly, bisecting beta0 until |P_F - p_f| <= eta.

    ``training`` holds *raw* feature vectors; normalization statistics are
    fitted here and embedded in every model, so the returned model classifies
    raw vectors directly.

    Returns the full trace.  When the tolerance is unreachable within
    ``target.max_iters`` trainings, the trace carries ``converged=False``
    and ``final_model`` is the iterate whose P_F came closest.
    """
    stats = fit_normalization(training)
    X_raw, y = vectors_to_arrays(training)
    X = (X_raw - stats.mean) / stats.std
    clutter_raw = X_raw[y < 0]          # decide_batch normalizes internally
    n_clutter = int(clutter_raw.shape[0])
    if n_clutter == 0:
        raise NoClutterSamples("training set has no clutter vectors")
    if target.eta < 1.0 / n_clutter:
        warnings.warn(
            f"eta={target.eta:g} is below the FAR granularity "
            f"1/{n_clutter}; exact convergence may be unreachable",
            InfeasibleToleranceWarning,
            stacklevel=2,
        )

    cache = KernelCache.for_problem(
        X.shape[0], kernel,
        cache_mb if cache_mb is not None else TrainConfig().cache_mb,
    )
    records: list[IterationRecord] = []
    best: tuple[float, SvmModel] | None = None

    def run(beta0: float) -> tuple[float, SvmModel]:
        nonlocal best
        config = TrainConfig(
            beta0=beta0, beta1=target.beta1,
            kkt_tol=kkt_tol, max_passes=max_passes,
        )
        model = train_arrays(X, y, kernel, config, norm_stats=stats, cache=cache)
        n_err = _clutter_counts(model, clutter_raw)
        p_F = n_err / n_clutter
        records.append(IterationRecord(beta0=beta0, p_F=p_F, n_clutter_errors=n_err))
        if best is None or abs(p_F - target.p_f) < abs(best[0] - target.p_f):
            best = (p_F, model)
        return p_F, model

    beta_l, beta_h = target.beta_l, target.beta_h

    # Bracket validation: make sure the upper end can push the FAR at or
    # below the target before bisecting toward it.
    p_F, model = run(beta_h)
    if abs(p_F - target.p_f) <= target.eta:
        return ControllerTrace(target, records, True, model)
    while p_F > target.p_f and beta_h < BETA_H_CEILING and len(records) < target.max_iters:
        beta_h *= 2.0
        p_F, model = run(beta_h)
        if abs(p_F - target.p_f) <= target.eta:
            return ControllerTrace(target, records, True, model)

    while len(records) < target.max_iters:
        beta0 = (beta_h + beta_l) / 2.0
        p_F, model = run(beta0)
        if abs(p_F - target.p_f) <= target.eta:
            return ControllerTrace(target, records, True, model)
        if p_F < target.p_f:
            beta_h = beta0
        else:
            beta_l = beta0
    return ControllerTrace(target, records, False, best[1])


# ---------------------------------------------------------------------------
# Trace persistence
# ---------------------------------------------------------------------------

def save_trace(trace: ControllerTrace, path: str | Path, model_ref: str = "") -> None:
    doc = {
        "target": {
            "p_f": trace.target.p_f,
            "eta": trace.target.eta,
            "beta_h": trace.target.beta_h,
            "beta_l": trace.target.beta_l,
            "beta1": trace.target.beta1,
            "max_iters": trace.target.max_iters,
        },
        "iterations": [
            {"beta0": r.beta0, "p_F": r.p_F, "errors": r.n_clutter_errors}
            for r in trace.iterations
        ],
        "converged": trace.converged,
        "model_ref": model_ref,
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
