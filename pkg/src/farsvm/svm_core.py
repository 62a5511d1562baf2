"""Class-weighted soft-margin RBF-kernel SVM: dual solver and decisions.

The primal penalizes clutter and target hinge losses separately (beta0 for
clutter, beta1 for targets), so the dual box constraint is per-class:

    maximize  sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j k(F_i, F_j)
    s.t.      0 <= alpha_i <= beta0  (clutter),  0 <= alpha_i <= beta1 (targets)
              sum_i alpha_i y_i = 0

solved by sequential pair updates on the max-violating pair.  Two engines
implement the identical update rule: a compiled extension (preferred) and a
NumPy fallback, chosen at import time.  Set ``FARSVM_FORCE_FALLBACK=1`` to
pin the fallback.

The kernel default follows the detector's stated form with an *unsquared*
distance, exp(-||F1 - F2|| / (2 delta^2)) — an exponential-type kernel, still
positive definite; the conventional squared-norm Gaussian is available via
``KernelConfig(form="gaussian")``.
"""

from __future__ import annotations

import json
import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

from .errors import (
    InvalidParameter,
    MalformedFile,
    NonConvergenceWarning,
    SingleClassData,
)
from .features import NormalizationStats, vectors_to_arrays

KERNEL_FORMS = ("paper", "gaussian")
DEFAULT_CACHE_MB = 256.0


def _load_engine():
    if not os.environ.get("FARSVM_FORCE_FALLBACK"):
        try:
            from . import _smo

            return _smo, "compiled"
        except ImportError:
            pass
    from . import _smo_fallback

    return _smo_fallback, "fallback"


_ENGINE, _ENGINE_NAME = _load_engine()


def active_engine() -> str:
    """Name of the dual-solver engine selected at import ('compiled'/'fallback')."""
    return _ENGINE_NAME


@dataclass(frozen=True)
class KernelConfig:
    delta: float = 1.0
    form: str = "paper"   # "paper": exp(-||u-v||/(2 d^2)); "gaussian": squared norm

    def __post_init__(self) -> None:
        object.__setattr__(self, "delta", float(self.delta))
        if not (np.isfinite(self.delta) and self.delta > 0):
            raise InvalidParameter("kernel delta must be positive and finite")
        if self.form not in KERNEL_FORMS:
            raise InvalidParameter(f"kernel form must be one of {KERNEL_FORMS}")


@dataclass(frozen=True)
class TrainConfig:
    beta0: float = 1.0
    beta1: float = 1.0
    kkt_tol: float = 1e-3
    max_passes: int | None = None   # pair-update budget; None -> max(10*M, 1000)
    cache_mb: float = DEFAULT_CACHE_MB

    def __post_init__(self) -> None:
        object.__setattr__(self, "beta0", float(self.beta0))
        object.__setattr__(self, "beta1", float(self.beta1))
        if not (self.beta0 > 0 and self.beta1 > 0):
            raise InvalidParameter("beta0 and beta1 must be positive")
        if not (0.0 < self.kkt_tol < 1.0):
            raise InvalidParameter("kkt_tol must lie in (0, 1)")
        if self.max_passes is not None and self.max_passes < 1:
            raise InvalidParameter("max_passes must be >= 1 when given")


@dataclass(frozen=True)
class TrainingMeta:
    beta0: float
    beta1: float
    converged: bool
    n_updates: int | None = None
    kkt_gap: float | None = None
    objective: float | None = None


def identity_stats() -> NormalizationStats:
    return NormalizationStats(mean=np.zeros(3), std=np.ones(3))


@dataclass(eq=False)
class SvmModel:
    support_vectors: np.ndarray      # (S, 3), normalized feature space
    alphas: np.ndarray               # (S,), strictly positive
    labels: np.ndarray               # (S,), +/-1
    bias: float
    kernel: KernelConfig
    norm_stats: NormalizationStats
    training_meta: TrainingMeta

    def __post_init__(self) -> None:
        self.support_vectors = np.atleast_2d(
            np.asarray(self.support_vectors, dtype=np.float64)
        )
        self.alphas = np.asarray(self.alphas, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.float64)
        n = self.support_vectors.shape[0]
        if n == 0 or self.alphas.shape[0] != n or self.labels.shape[0] != n:
            raise InvalidParameter(
                "support vectors, alphas, and labels must be equal-length "
                "and non-empty"
            )

    @property
    def n_support(self) -> int:
        return self.support_vectors.shape[0]


# ---------------------------------------------------------------------------
# Kernel evaluation
# ---------------------------------------------------------------------------

def rbf_kernel(f1, f2, config: KernelConfig) -> float:
    """Scalar kernel value between two feature vectors."""
    a = np.asarray(f1, dtype=np.float64)
    b = np.asarray(f2, dtype=np.float64)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise InvalidParameter("kernel inputs must be finite")
    d2 = float(np.dot(a - b, a - b))
    r = np.sqrt(d2) if config.form == "paper" else d2
    return float(np.exp(-r / (2.0 * config.delta**2)))


def kernel_matrix(A, B, config: KernelConfig) -> np.ndarray:
    """Cross-kernel matrix between row sets A (n, 3) and B (s, 3)."""
    metric = "euclidean" if config.form == "paper" else "sqeuclidean"
    D = cdist(np.atleast_2d(A), np.atleast_2d(B), metric)
    return np.exp(-D / (2.0 * config.delta**2))


# ---------------------------------------------------------------------------
# Kernel-row cache shared across trainings of one problem
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class KernelCache:
    """LRU row cache reused across solves on a fixed (X, kernel) problem.

    The bisection controller retrains many times with different penalties
    while the kernel stays fixed; sharing rows across those solves avoids
    recomputing them.
    """

    rows: np.ndarray      # (slots, M) float64
    owner: np.ndarray     # (slots,) int64, training row held per slot, -1 empty
    slot_of: np.ndarray   # (M,) int64, inverse map, -1 not cached
    stamp: np.ndarray     # (slots,) int64 LRU stamps
    clock: np.ndarray     # (1,) int64
    key: tuple

    @staticmethod
    def for_problem(
        n: int, kernel: KernelConfig, cache_mb: float = DEFAULT_CACHE_MB
    ) -> "KernelCache":
        slots = int(cache_mb * 2**20 // (8 * max(n, 1)))
        slots = max(2, min(slots, n))
        return KernelCache(
            rows=np.empty((slots, n), dtype=np.float64),
            owner=np.full(slots, -1, dtype=np.int64),
            slot_of=np.full(n, -1, dtype=np.int64),
            stamp=np.zeros(slots, dtype=np.int64),
            clock=np.zeros(1, dtype=np.int64),
            key=(n, kernel.delta, kernel.form),
        )


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

def train_arrays(
    X,
    y,
    kernel: KernelConfig,
    config: TrainConfig,
    norm_stats: NormalizationStats | None = None,
    cache: KernelCache | None = None,
    engine=None,
) -> SvmModel:
    """Train on pre-normalized arrays X (M, 3) and labels y in {-1, +1}.

    ``cache`` may be shared across calls with identical (X, kernel); pass
    ``engine`` to force a specific solver module (benchmarks, parity tests).
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise InvalidParameter("X must be (M, d) with one label per row")
    if not np.all(np.isfinite(X)):
        raise InvalidParameter("training features must be finite")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise InvalidParameter("labels must be +1 or -1")
    if np.all(y > 0) or np.all(y < 0):
        raise SingleClassData("training data contains a single class")

    M = X.shape[0]
    C = np.where(y > 0, config.beta1, config.beta0).astype(np.float64)
    # One "pass" = one selection sweep = one pair update.  Every accepted
    # update strictly improves the dual, so the budget is a safety net; the
    # floor lets tiny problems zig-zag their way to tolerance.
    max_updates = config.max_passes if config.max_passes is not None else max(10 * M, 1000)
    if cache is None:
        cache = KernelCache.for_problem(M, kernel, config.cache_mb)
    elif cache.key != (M, kernel.delta, kernel.form):
        raise InvalidParameter("kernel cache built for a different problem")
    solver = engine if engine is not None else _ENGINE
    alpha, G, bias, n_updates, converged, gap = solver.solve(
        X, y, C, kernel.delta, kernel.form == "paper",
        config.kkt_tol, max_updates,
        cache.rows, cache.owner, cache.slot_of, cache.stamp, cache.clock,
    )
    if not converged:
        warnings.warn(
            f"pair-update budget {max_updates} exhausted with optimality gap "
            f"{gap:.3e} > {config.kkt_tol:.1e}; returning best iterate",
            NonConvergenceWarning,
            stacklevel=2,
        )
    objective = float(alpha.sum() - 0.5 * np.dot(alpha * y, G))
    sv = alpha > 0.0
    meta = TrainingMeta(
        beta0=config.beta0,
        beta1=config.beta1,
        converged=bool(converged),
        n_updates=int(n_updates),
        kkt_gap=float(gap),
        objective=objective,
    )
    return SvmModel(
        support_vectors=X[sv],
        alphas=alpha[sv],
        labels=y[sv],
        bias=float(bias),
        kernel=kernel,
        norm_stats=norm_stats if norm_stats is not None else identity_stats(),
        training_meta=meta,
    )


def train(
    data,
    kernel: KernelConfig,
    config: TrainConfig,
    norm_stats: NormalizationStats | None = None,
    cache: KernelCache | None = None,
    engine=None,
) -> SvmModel:
    """Train on a list of (already normalized) feature vectors."""
    X, y = vectors_to_arrays(data)
    return train_arrays(X, y, kernel, config, norm_stats, cache, engine)


def train_unweighted(
    data,
    kernel: KernelConfig,
    beta: float,
    kkt_tol: float = 1e-3,
    max_passes: int | None = None,
) -> SvmModel:
    """Single-penalty soft-margin SVM: the weighted path with beta0=beta1.

    The weighted formulation reduces exactly to this when both penalties
    coincide, so there is deliberately no separate solver here.
    """
    return train(
        data, kernel,
        TrainConfig(beta0=beta, beta1=beta, kkt_tol=kkt_tol, max_passes=max_passes),
    )


# ---------------------------------------------------------------------------
# Decisions
# ---------------------------------------------------------------------------

_DECIDE_CHUNK = 1024


def _margins(model: SvmModel, Z: np.ndarray) -> np.ndarray:
    """g(F) = sum_i alpha_i y_i k(SV_i, F) - b for normalized rows Z."""
    weights = model.alphas * model.labels
    out = np.empty(Z.shape[0], dtype=np.float64)
    for lo in range(0, Z.shape[0], _DECIDE_CHUNK):
        block = Z[lo : lo + _DECIDE_CHUNK]
        out[lo : lo + _DECIDE_CHUNK] = (
            kernel_matrix(block, model.support_vectors, model.kernel) @ weights
        )
    out -= model.bias
    return out


def _normalize_rows(model: SvmModel, X: np.ndarray) -> np.ndarray:
    return (X - model.norm_stats.mean) / model.norm_stats.std


def decide(model: SvmModel, f) -> tuple[int, float]:
    """Classify one raw feature vector; returns (label, margin).

    The margin is g(F) after normalization by the model's stored statistics;
    g <= 0 maps to clutter (-1), the conservative side for false alarms.
    """
    raw = f.as_array() if hasattr(f, "as_array") else np.asarray(f, dtype=np.float64)
    g = float(_margins(model, _normalize_rows(model, np.atleast_2d(raw)))[0])
    return (1 if g > 0.0 else -1), g


def decide_batch(model: SvmModel, data) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`decide` over feature vectors or an (n, 3) array."""
    if isinstance(data, np.ndarray):
        X = np.atleast_2d(np.asarray(data, dtype=np.float64))
    else:
        X, _ = vectors_to_arrays(data)
    if X.shape[0] == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
    g = _margins(model, _normalize_rows(model, X))
    labels = np.where(g > 0.0, 1, -1).astype(np.int64)
    return labels, g


# ---------------------------------------------------------------------------
# Model persistence
# ---------------------------------------------------------------------------

def save_model(model: SvmModel, path: str | Path) -> None:
    doc = {
        "kernel": {"delta": model.kernel.delta, "form": model.kernel.form},
        "bias": model.bias,
        "support_vectors": model.support_vectors.tolist(),
        "alphas": model.alphas.tolist(),
        "labels": [int(l) for l in model.labels],
        "norm_stats": model.norm_stats.to_dict(),
        "training_meta": {
            "beta0": model.training_meta.beta0,
            "beta1": model.training_meta.beta1,
            "converged": model.training_meta.converged,
        },
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> SvmModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"{path}: {exc}") from exc
    try:
        meta = doc["training_meta"]
        return SvmModel(
            support_vectors=np.asarray(doc["support_vectors"], dtype=np.float64),
            alphas=np.asarray(doc["alphas"], dtype=np.float64),
            labels=np.asarray(doc["labels"], dtype=np.float64),
            bias=float(doc["bias"]),
            kernel=KernelConfig(
                delta=float(doc["kernel"]["delta"]), form=doc["kernel"]["form"]
            ),
            norm_stats=NormalizationStats.from_dict(doc["norm_stats"]),
            training_meta=TrainingMeta(
                beta0=float(meta["beta0"]),
                beta1=float(meta["beta1"]),
                converged=bool(meta["converged"]),
            ),
        )
    except KeyError as exc:
        raise MalformedFile(f"{path}: missing field {exc}") from exc
