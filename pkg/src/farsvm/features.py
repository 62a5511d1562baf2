"""Per-segment scalar features and 3-D feature-vector assembly.

Three statistics summarize one amplitude window:

* ``tie`` — Shannon entropy (bits) of the amplitude histogram over K
  equal-width bins spanning the window's own [min, max] range.  Target
  returns concentrate amplitude mass and lower the entropy.
* ``the`` — Hurst exponent from rescaled-range analysis: the window is cut
  into non-overlapping sub-periods of length tau, the span of cumulative
  mean-deviations is divided by the population standard deviation, and the
  slope of log2(R/S) against log2(tau) estimates long-range persistence.
* ``fpar`` — peak-to-average ratio of the amplitude spectrum magnitude over
  all N DFT bins.  A steady scatterer concentrates spectral power and pushes
  this ratio up.

Features live on very different scales, so vectors are z-scored (training
statistics only) before they reach the kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateInput,
    EmptyTrainingSet,
    FarSvmError,
    InvalidParameter,
    MalformedFile,
)
from .signal_model import Label, Segment

DEFAULT_K_BINS = 100
# Log-spaced dyadic/half-dyadic scales, 128..2048 samples; capped at half the
# window length when a window is shorter.
DEFAULT_TAU_GRID = (128, 181, 256, 362, 512, 724, 1024, 1448, 2048)

FEATURE_CSV_HEADER = "tie,the,fpar,label,source_cell,start_index"


@dataclass(frozen=True)
class FeatureConfig:
    k_bins: int = DEFAULT_K_BINS
    tau_grid: tuple[int, ...] | None = None   # None -> default grid for length

    def __post_init__(self) -> None:
        if self.k_bins < 1:
            raise InvalidParameter("k_bins must be >= 1")
        if self.tau_grid is not None:
            object.__setattr__(
                self, "tau_grid", tuple(int(t) for t in self.tau_grid)
            )


@dataclass(frozen=True)
class FeatureVector:
    tie: float
    the: float
    fpar: float
    label: Label
    source_cell: int = -1
    start_index: int = -1

    def as_array(self) -> np.ndarray:
        return np.array([self.tie, self.the, self.fpar], dtype=np.float64)


@dataclass(frozen=True)
class NormalizationStats:
    mean: np.ndarray   # shape (3,)
    std: np.ndarray    # shape (3,), strictly positive

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @staticmethod
    def from_dict(data: dict) -> "NormalizationStats":
        return NormalizationStats(
            mean=np.asarray(data["mean"], dtype=np.float64),
            std=np.asarray(data["std"], dtype=np.float64),
        )


def _as_finite_array(amplitudes, name: str) -> np.ndarray:
    x = np.asarray(amplitudes, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidParameter(f"{name} expects a one-dimensional sequence")
    if x.size and not np.all(np.isfinite(x)):
        raise InvalidParameter(f"{name} received non-finite amplitudes")
    return x


def tie(amplitudes, k_bins: int = DEFAULT_K_BINS) -> float:
    """Histogram entropy in bits over ``k_bins`` equal-width bins.

    Bins span [min(x), max(x)] with the top edge closed; empty bins
    contribute zero.  A constant sequence has all mass in one bin -> 0.
    """
    x = _as_finite_array(amplitudes, "tie")
    if x.size == 0:
        raise InvalidParameter("tie of an empty sequence")
    if k_bins < 1:
        raise InvalidParameter("k_bins must be >= 1")
    lo = x.min()
    span = x.max() - lo
    if span == 0.0:
        return 0.0
    idx = np.floor((x - lo) * (k_bins / span)).astype(np.int64)
    np.clip(idx, 0, k_bins - 1, out=idx)   # max(x) falls in the last bin
    counts = np.bincount(idx, minlength=k_bins)
    p = counts[counts > 0] / x.size
    return float(-np.sum(p * np.log2(p)))


def default_tau_grid(n_samples: int) -> tuple[int, ...]:
    """Default sub-period scales usable for a window of ``n_samples``."""
    grid = tuple(t for t in DEFAULT_TAU_GRID if 2 * t <= n_samples)
    if len(grid) < 3:
        raise InvalidParameter(
            f"window of {n_samples} samples is too short for the default "
            f"scale grid (need at least 3 scales with 2*tau <= N)"
        )
    return grid


def rescaled_range_curve(amplitudes, tau_grid) -> np.ndarray:
    """(R/S)_tau for each scale: mean rescaled range over sub-periods.

    Sub-periods with zero standard deviation are skipped; a scale where every
    sub-period is constant admits no finite rescaled range.
    """
    x = _as_finite_array(amplitudes, "rescaled_range_curve")
    out = np.empty(len(tau_grid), dtype=np.float64)
    for i, tau in enumerate(tau_grid):
        n_sub = x.size // tau
        blocks = x[: n_sub * tau].reshape(n_sub, tau)
        deviations = blocks - blocks.mean(axis=1, keepdims=True)
        walk = np.cumsum(deviations, axis=1)
        spans = walk.max(axis=1) - walk.min(axis=1)
        sds = blocks.std(axis=1)            # population divisor tau
        valid = sds > 0.0
        if not valid.any():
            raise DegenerateInput(
                f"every length-{tau} sub-period is constant; R/S undefined"
            )
        out[i] = np.mean(spans[valid] / sds[valid])
    return out


def fit_hurst(tau_grid, rs_values) -> float:
    """Slope of log2(R/S) against log2(tau) by ordinary least squares."""
    rs = np.asarray(rs_values, dtype=np.float64)
    if np.any(rs <= 0.0):
        raise DegenerateInput("rescaled-range values must be positive")
    slope, _ = np.polyfit(np.log2(np.asarray(tau_grid, dtype=np.float64)),
                          np.log2(rs), 1)
    return float(slope)


def the(amplitudes, tau_grid=None) -> float:
    """Hurst exponent of an amplitude window via rescaled-range analysis."""
    x = _as_finite_array(amplitudes, "the")
    grid = default_tau_grid(x.size) if tau_grid is None else tuple(
        int(t) for t in tau_grid
    )
    if len(set(grid)) < 3:
        raise InvalidParameter("tau_grid needs at least 3 distinct scales")
    if min(grid) < 8:
        raise InvalidParameter("every tau must be >= 8 samples")
    if 2 * max(grid) > x.size:
        raise InvalidParameter(
            f"largest tau {max(grid)} exceeds half the window ({x.size})"
        )
    return fit_hurst(grid, rescaled_range_curve(x, grid))


def fpar(amplitudes) -> float:
    """Peak-to-average magnitude ratio of the full length-N DFT.

    Also accepts a complex series (magnitudes are taken after the transform,
    so a single-bin exponential scores exactly N); the detector pipeline
    itself always feeds real amplitude windows.
    """
    x = np.asarray(amplitudes)
    if np.iscomplexobj(x):
        x = x.astype(np.complex128)
        if x.ndim != 1:
            raise InvalidParameter("fpar expects a one-dimensional sequence")
        if x.size and not np.all(np.isfinite(x)):
            raise InvalidParameter("fpar received non-finite amplitudes")
    else:
        x = _as_finite_array(amplitudes, "fpar")
    if x.size < 2:
        raise InvalidParameter("fpar needs at least 2 samples")
    if not np.any(x):
        raise InvalidParameter("fpar of all-zero amplitudes is 0/0")
    magnitude = np.abs(np.fft.fft(x))
    return float(magnitude.max() / magnitude.mean())


def extract(segment: Segment, config: FeatureConfig | None = None) -> FeatureVector:
    """Compute the 3-D feature vector of one segment.

    Feature errors propagate with the segment's provenance prefixed.
    """
    cfg = config or FeatureConfig()
    grid = cfg.tau_grid or default_tau_grid(segment.amplitudes.size)
    try:
        return FeatureVector(
            tie=tie(segment.amplitudes, cfg.k_bins),
            the=the(segment.amplitudes, grid),
            fpar=fpar(segment.amplitudes),
            label=segment.label,
            source_cell=segment.source_cell,
            start_index=segment.start_index,
        )
    except FarSvmError as exc:
        raise type(exc)(
            f"cell {segment.source_cell} @ sample {segment.start_index}: {exc}"
        ) from exc


def extract_batch(
    segments, config: FeatureConfig | None = None
) -> list[FeatureVector]:
    cfg = config or FeatureConfig()
    return [extract(s, cfg) for s in segments]


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------

def vectors_to_arrays(vectors) -> tuple[np.ndarray, np.ndarray]:
    """Stack feature vectors into (X, y) with y in {-1.0, +1.0}."""
    if not vectors:
        return np.empty((0, 3), dtype=np.float64), np.empty(0, dtype=np.float64)
    X = np.stack([v.as_array() for v in vectors])
    y = np.array([float(v.label) for v in vectors])
    return X, y


def fit_normalization(vectors) -> NormalizationStats:
    """Per-dimension mean/std over training vectors (population form).

    Dimensions with zero spread get std 1 so normalization stays defined.
    """
    if not vectors:
        raise EmptyTrainingSet("cannot fit normalization on no vectors")
    X, _ = vectors_to_arrays(vectors)
    std = X.std(axis=0)
    std[std == 0.0] = 1.0
    return NormalizationStats(mean=X.mean(axis=0), std=std)


def apply_normalization(
    vector: FeatureVector, stats: NormalizationStats
) -> FeatureVector:
    z = (vector.as_array() - stats.mean) / stats.std
    return replace(vector, tie=float(z[0]), the=float(z[1]), fpar=float(z[2]))


def normalize_batch(vectors, stats: NormalizationStats) -> list[FeatureVector]:
    return [apply_normalization(v, stats) for v in vectors]


# ---------------------------------------------------------------------------
# Feature file I/O
# ---------------------------------------------------------------------------

def save_features(vectors, path: str | Path) -> None:
    lines = [FEATURE_CSV_HEADER]
    for v in vectors:
        lines.append(
            f"{v.tie:.17g},{v.the:.17g},{v.fpar:.17g},"
            f"{int(v.label)},{v.source_cell},{v.start_index}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_features(path: str | Path) -> list[FeatureVector]:
    text = Path(path).read_text(encoding="utf-8").strip().splitlines()
    if not text or text[0].strip() != FEATURE_CSV_HEADER:
        raise MalformedFile(
            f"{path}: expected header '{FEATURE_CSV_HEADER}'"
        )
    vectors = []
    for line_no, line in enumerate(text[1:], start=2):
        parts = line.split(",")
        if len(parts) != 6:
            raise MalformedFile(f"{path}:{line_no}: expected 6 fields")
        try:
            vectors.append(
                FeatureVector(
                    tie=float(parts[0]),
                    the=float(parts[1]),
                    fpar=float(parts[2]),
                    label=Label(int(parts[3])),
                    source_cell=int(parts[4]),
                    start_index=int(parts[5]),
                )
            )
        except ValueError as exc:
            raise MalformedFile(f"{path}:{line_no}: {exc}") from exc
    return vectors
