"""Radar return data model, file I/O, and the synthetic clutter generator.

A dataset is a stack of range cells observed simultaneously: one *primary*
cell containing the target (cooperative or synthetic), optional *secondary*
cells adjacent to it whose returns may be contaminated by target energy
spill-over, and the remaining *clutter-only* cells.  Detection features are
computed on sliding amplitude windows (segments) drawn from primary and
clutter-only cells; secondary cells carry no trustworthy label and are never
segmented.

The synthetic generator produces sea-clutter-like returns: a compound model
with a slowly varying Gamma texture modulating correlated complex-Gaussian
speckle, plus sparse coherent burst events mimicking sea spikes.  Spikes are
what give the clutter a heavy amplitude tail and make the false-alarm/detection
trade-off non-trivial; without them the two classes separate so cleanly that
false-alarm control degenerates to a step function.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from pathlib import Path

import numpy as np

from .errors import (
    InconsistentCells,
    InvalidParameter,
    InvalidWindow,
    MalformedFile,
    MissingMetadata,
    SecondaryCellNotAllowed,
)

SAMPLE_RATE_HZ = 1000.0

# Generator tuning (samples at SAMPLE_RATE_HZ unless stated otherwise).
TEXTURE_BLOCK = 100          # texture held constant over 100 ms blocks
SPECKLE_CORR = 15            # speckle decorrelation scale
TARGET_AMP_CORR = 500        # target amplitude fluctuates on ~0.5 s scale
PHASE_STEP_STD = 0.05        # random-walk phase increment (radians)
SPIKE_RATE_HZ = 0.06         # mean sea-spike arrivals per second
SPIKE_WIDTH_MS = (150.0, 450.0)
SPIKE_AMP = 2.2              # Rayleigh scale of spike peak amplitude


class CellRole(Enum):
    PRIMARY = "primary"
    SECONDARY = "secondary"
    CLUTTER_ONLY = "clutter_only"


class Polarization(Enum):
    HH = "HH"
    VV = "VV"
    HV = "HV"
    VH = "VH"


class Label(IntEnum):
    """Segment label; the sign convention matches the decision function."""

    TARGET = 1
    CLUTTER = -1


@dataclass(eq=False)
class ComplexSeries:
    """One range cell: complex baseband samples at a fixed rate."""

    samples: np.ndarray        # complex128, shape (n,)
    sample_rate_hz: float
    role: CellRole
    index: int

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        if self.samples.ndim != 1:
            raise InvalidParameter("cell samples must be one-dimensional")

    def __len__(self) -> int:
        return self.samples.shape[0]

    def amplitudes(self) -> np.ndarray:
        return np.abs(self.samples)


@dataclass(frozen=True)
class SyntheticOrigin:
    """Provenance of a generated dataset (enough to regenerate it)."""

    seed: int
    scr_db: float
    clutter_shape: float


@dataclass(eq=False)
class Dataset:
    cells: list[ComplexSeries]
    polarization: Polarization = Polarization.HH
    name: str = ""
    origin: SyntheticOrigin | None = None

    def __post_init__(self) -> None:
        lengths = {len(c) for c in self.cells}
        if len(lengths) > 1:
            raise InconsistentCells(
                f"cells disagree on length: {sorted(lengths)}"
            )

    @property
    def n_samples(self) -> int:
        return len(self.cells[0]) if self.cells else 0

    def primary_cell(self) -> ComplexSeries:
        for cell in self.cells:
            if cell.role is CellRole.PRIMARY:
                return cell
        raise MissingMetadata("dataset has no primary cell")

    def clutter_cells(self) -> list[ComplexSeries]:
        return [c for c in self.cells if c.role is CellRole.CLUTTER_ONLY]


@dataclass(frozen=True)
class Segment:
    """A contiguous amplitude window with provenance and implied label."""

    amplitudes: np.ndarray     # float64, shape (D,)
    label: Label
    source_cell: int
    start_index: int


class FileFormat(Enum):
    CSV = "csv"                # one "I,Q" pair per line, %.17g text
    BINARY_F32 = "binary_f32"  # interleaved little-endian float32 I/Q

    @property
    def extension(self) -> str:
        return {"csv": ".csv", "binary_f32": ".bin"}[self.value]


# ---------------------------------------------------------------------------
# Synthetic generation
# ---------------------------------------------------------------------------

def _correlated_cgauss(rng: np.random.Generator, n: int, corr: int) -> np.ndarray:
    """Unit-power complex Gaussian series, correlated over ~``corr`` samples.

    White circular Gaussian noise is filtered with a circular (FFT) Gaussian
    kernel of unit L2 norm, which preserves per-sample power exactly.
    """
    w = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
    sigma = corr / 2.0
    t = np.arange(n, dtype=np.float64)
    t = np.minimum(t, n - t)
    h = np.exp(-0.5 * (t / sigma) ** 2)
    h /= np.linalg.norm(h)
    return np.fft.ifft(np.fft.fft(w) * np.fft.fft(h))


def _sea_spikes(rng: np.random.Generator, n: int, fs: float) -> np.ndarray:
    """Sparse coherent bursts: Gaussian envelopes with a slow phase walk."""
    out = np.zeros(n, dtype=np.complex128)
    n_spikes = rng.poisson(SPIKE_RATE_HZ * n / fs)
    for _ in range(n_spikes):
        center = rng.uniform(0.0, n)
        width = rng.uniform(*SPIKE_WIDTH_MS) * fs / 1000.0
        amp = rng.rayleigh(SPIKE_AMP)
        lo = max(0, int(center - 4.0 * width))
        hi = min(n, int(center + 4.0 * width))
        if hi <= lo:
            continue
        t = np.arange(lo, hi, dtype=np.float64)
        envelope = amp * np.exp(-0.5 * ((t - center) / width) ** 2)
        phase = rng.uniform(0.0, 2.0 * np.pi) + np.cumsum(
            rng.normal(0.0, PHASE_STEP_STD, hi - lo)
        )
        out[lo:hi] += envelope * np.exp(1j * phase)
    return out


def _clutter_cell(rng: np.random.Generator, n: int, shape: float) -> np.ndarray:
    """Compound clutter: blockwise Gamma texture x speckle, plus spikes.

    Texture is drawn i.i.d. per block with unit mean (Gamma(shape, 1/shape)),
    so the amplitude is K-distributed within each block; smaller ``shape``
    means heavier tails.
    """
    n_blocks = -(-n // TEXTURE_BLOCK)
    texture = np.repeat(
        rng.gamma(shape, 1.0 / shape, n_blocks), TEXTURE_BLOCK
    )[:n]
    speckle = _correlated_cgauss(rng, n, SPECKLE_CORR)
    return np.sqrt(texture) * speckle + _sea_spikes(rng, n, SAMPLE_RATE_HZ)


def _target_return(
    rng: np.random.Generator, n: int, scr_linear: float, p_ref: float
) -> np.ndarray:
    """Slowly fluctuating target echo scaled to the requested power ratio."""
    if scr_linear == 0.0:
        return np.zeros(n, dtype=np.complex128)
    amplitude = np.abs(_correlated_cgauss(rng, n, TARGET_AMP_CORR))
    phase = np.cumsum(rng.normal(0.0, PHASE_STEP_STD, n))
    target = amplitude * np.exp(1j * phase)
    power = np.mean(np.abs(target) ** 2)
    return target * np.sqrt(scr_linear * p_ref / power)


def synthesize_dataset(
    seed: int,
    scr_db: float,
    n_cells: int = 14,
    n_samples: int = 2**17,
    clutter_shape: float = 1.0,
    polarization: Polarization = Polarization.HH,
) -> Dataset:
    """Generate a labelled dataset: cell 0 = clutter + target, rest clutter.

    The target power is calibrated against the *realized* mean clutter power
    across all cells, so the achieved signal-to-clutter ratio tracks
    ``scr_db`` closely even for heavy-tailed texture.  ``scr_db = -inf``
    produces a target-free primary cell (useful for pure-FAR studies).

    Args:
        seed: RNG seed; equal seeds give bit-identical datasets.
        scr_db: average signal-to-clutter ratio in dB, or ``-inf``.
        n_cells: total range cells (>= 2; cell 0 is primary).
        n_samples: samples per cell (>= 4096).
        clutter_shape: Gamma texture shape parameter (> 0). Unit mean is
            maintained, so this only changes tail heaviness.
        polarization: nominal polarization recorded in metadata.

    Returns:
        Dataset with cell 0 PRIMARY and cells 1..n_cells-1 CLUTTER_ONLY.
    """
    if n_cells < 2:
        raise InvalidParameter("n_cells must be >= 2 (need clutter-only cells)")
    if n_samples < 4096:
        raise InvalidParameter("n_samples must be >= 4096")
    if not (np.isfinite(clutter_shape) and clutter_shape > 0):
        raise InvalidParameter("clutter_shape must be positive and finite")
    if np.isnan(scr_db) or scr_db == np.inf:
        raise InvalidParameter("scr_db must be a real number or -inf")
    scr_linear = 0.0 if scr_db == -np.inf else 10.0 ** (scr_db / 10.0)
    if not np.isfinite(scr_linear):
        raise InvalidParameter(f"scr_db={scr_db} produces a non-finite scale")

    rng = np.random.default_rng(seed)
    clutter = [_clutter_cell(rng, n_samples, clutter_shape) for _ in range(n_cells)]
    p_ref = float(np.mean([np.mean(np.abs(c) ** 2) for c in clutter]))
    target = _target_return(rng, n_samples, scr_linear, p_ref)

    cells = [
        ComplexSeries(clutter[0] + target, SAMPLE_RATE_HZ, CellRole.PRIMARY, 0)
    ]
    cells += [
        ComplexSeries(clutter[k], SAMPLE_RATE_HZ, CellRole.CLUTTER_ONLY, k)
        for k in range(1, n_cells)
    ]
    return Dataset(
        cells=cells,
        polarization=polarization,
        name=f"synthetic-seed{seed}",
        origin=SyntheticOrigin(seed, float(scr_db), float(clutter_shape)),
    )


# ---------------------------------------------------------------------------
# Segmentation
# ---------------------------------------------------------------------------

def segment_cell(cell: ComplexSeries, d: int = 64, window: int = 4096) -> list[Segment]:
    """Slide a length-``window`` amplitude window by step ``d`` over a cell.

    Produces ``floor((n - window) / d) + 1`` segments labelled by the cell
    role (PRIMARY -> TARGET, CLUTTER_ONLY -> CLUTTER).

    Raises:
        SecondaryCellNotAllowed: secondary cells have no trustworthy label.
        InvalidWindow: step/window out of range for this cell.
    """
    if cell.role is CellRole.SECONDARY:
        raise SecondaryCellNotAllowed(
            f"cell {cell.index} is secondary; its segments have no label"
        )
    n = len(cell)
    if window < 2 or window > n:
        raise InvalidWindow(f"window={window} out of range for n={n}")
    if d < 1 or d > window:
        raise InvalidWindow(f"step d={d} must be in [1, window]")
    label = Label.TARGET if cell.role is CellRole.PRIMARY else Label.CLUTTER
    amplitude = cell.amplitudes()
    segments = []
    for start in range(0, n - window + 1, d):
        segments.append(
            Segment(
                amplitudes=amplitude[start : start + window],
                label=label,
                source_cell=cell.index,
                start_index=start,
            )
        )
    return segments


def segment_dataset(
    dataset: Dataset, d: int = 64, window: int = 4096
) -> list[Segment]:
    """Segment every primary and clutter-only cell, in cell order."""
    segments: list[Segment] = []
    for cell in dataset.cells:
        if cell.role is CellRole.SECONDARY:
            continue
        segments.extend(segment_cell(cell, d, window))
    return segments


# ---------------------------------------------------------------------------
# File I/O
# ---------------------------------------------------------------------------

def _meta_path(directory: Path) -> Path:
    return directory / "meta.json"


def save_dataset(
    dataset: Dataset, path: str | Path, file_format: FileFormat = FileFormat.CSV
) -> None:
    """Write one file per cell plus a ``meta.json`` sidecar.

    CSV keeps full float64 precision (%.17g); BINARY_F32 quantizes to float32
    on the first save and round-trips exactly from then on.
    """
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    for cell in dataset.cells:
        target = directory / f"cell_{cell.index}{file_format.extension}"
        if file_format is FileFormat.CSV:
            stacked = np.column_stack([cell.samples.real, cell.samples.imag])
            np.savetxt(target, stacked, fmt="%.17g", delimiter=",")
        else:
            interleaved = np.empty(2 * len(cell), dtype="<f4")
            interleaved[0::2] = cell.samples.real
            interleaved[1::2] = cell.samples.imag
            interleaved.tofile(target)
    meta = {
        "sample_rate_hz": dataset.cells[0].sample_rate_hz,
        "primary_cell": next(
            c.index for c in dataset.cells if c.role is CellRole.PRIMARY
        ),
        "secondary_cells": [
            c.index for c in dataset.cells if c.role is CellRole.SECONDARY
        ],
        "polarization": dataset.polarization.value,
        "name": dataset.name,
    }
    if dataset.origin is not None:
        meta["origin"] = {
            "seed": dataset.origin.seed,
            "scr_db": dataset.origin.scr_db,
            "clutter_shape": dataset.origin.clutter_shape,
        }
    with open(_meta_path(directory), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2)


def _read_cell_file(path: Path, file_format: FileFormat) -> np.ndarray:
    if file_format is FileFormat.CSV:
        try:
            raw = np.loadtxt(path, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise MalformedFile(f"{path.name}: {exc}") from exc
        if raw.ndim != 2 or raw.shape[1] != 2:
            raise MalformedFile(
                f"{path.name}: expected two columns (I,Q), got shape {raw.shape}"
            )
        return raw[:, 0] + 1j * raw[:, 1]
    raw = np.fromfile(path, dtype="<f4")
    if raw.size == 0 or raw.size % 2 != 0:
        raise MalformedFile(
            f"{path.name}: interleaved I/Q record length must be even and "
            f"non-zero, got {raw.size} floats"
        )
    return raw[0::2].astype(np.float64) + 1j * raw[1::2].astype(np.float64)


def load_dataset(
    path: str | Path, file_format: FileFormat = FileFormat.CSV
) -> Dataset:
    """Load a cell directory written by :func:`save_dataset`.

    Cell roles come from the sidecar: ``primary_cell`` (required),
    ``secondary_cells`` (optional), everything else clutter-only.

    Raises:
        MissingMetadata: missing sidecar or required field.
        MalformedFile: unparseable cell file, bad record length, missing or
            non-contiguous cell indices, or out-of-range role declarations.
        InconsistentCells: cells of unequal length.
    """
    directory = Path(path)
    meta_file = _meta_path(directory)
    if not meta_file.is_file():
        raise MissingMetadata(f"no meta.json in {directory}")
    try:
        meta = json.loads(meta_file.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedFile(f"meta.json: {exc}") from exc
    if "primary_cell" not in meta:
        raise MissingMetadata("meta.json does not declare primary_cell")
    if "sample_rate_hz" not in meta:
        raise MissingMetadata("meta.json does not declare sample_rate_hz")

    files = sorted(directory.glob(f"cell_*{file_format.extension}"))
    if not files:
        raise MalformedFile(
            f"no cell_*{file_format.extension} files in {directory}"
        )
    by_index: dict[int, Path] = {}
    for f in files:
        stem = f.stem.removeprefix("cell_")
        try:
            by_index[int(stem)] = f
        except ValueError as exc:
            raise MalformedFile(f"unrecognized cell file name {f.name}") from exc
    n_cells = len(by_index)
    if sorted(by_index) != list(range(n_cells)):
        raise MalformedFile(
            f"cell indices must be contiguous from 0, got {sorted(by_index)}"
        )

    primary = int(meta["primary_cell"])
    secondary = {int(s) for s in meta.get("secondary_cells", [])}
    if not (0 <= primary < n_cells):
        raise MalformedFile(f"primary_cell={primary} out of range [0, {n_cells})")
    if not all(0 <= s < n_cells for s in secondary):
        raise MalformedFile("secondary_cells contains an out-of-range index")

    sample_rate = float(meta["sample_rate_hz"])
    cells = []
    lengths = set()
    for idx in range(n_cells):
        samples = _read_cell_file(by_index[idx], file_format)
        lengths.add(samples.shape[0])
        if idx == primary:
            role = CellRole.PRIMARY
        elif idx in secondary:
            role = CellRole.SECONDARY
        else:
            role = CellRole.CLUTTER_ONLY
        cells.append(ComplexSeries(samples, sample_rate, role, idx))
    if len(lengths) > 1:
        raise InconsistentCells(f"cells disagree on length: {sorted(lengths)}")

    try:
        polarization = Polarization(meta.get("polarization", "HH"))
    except ValueError as exc:
        raise MalformedFile(
            f"unknown polarization {meta.get('polarization')!r}"
        ) from exc
    origin = None
    if "origin" in meta:
        o = meta["origin"]
        origin = SyntheticOrigin(
            int(o["seed"]), float(o["scr_db"]), float(o["clutter_shape"])
        )
    return Dataset(
        cells=cells,
        polarization=polarization,
        name=str(meta.get("name", directory.name)),
        origin=origin,
    )
