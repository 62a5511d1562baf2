"""Invariants checked over generated inputs rather than fixed examples.

Scale equivariance by powers of two is asserted *bitwise*: multiplying IEEE
doubles by 2**k shifts exponents without touching mantissas, and every
operation in the feature pipelines (subtraction, division, FFT butterflies,
square roots of squared scales) commutes with that shift, so the outputs must
be identical to the last bit — any drift indicates a scale-dependent branch
hiding in the implementation.
"""

from __future__ import annotations

import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from farsvm import (
    CellRole,
    FeatureVector,
    KernelConfig,
    Label,
    SplitSpec,
    TrainConfig,
    fpar,
    rbf_kernel,
    split,
    the,
    tie,
)
from farsvm.features import apply_normalization, fit_normalization
from farsvm.signal_model import ComplexSeries, segment_cell
from farsvm.svm_core import train_arrays

from oracle_utils import make_vectors, random_problem

finite_values = st.floats(
    min_value=-1e150, max_value=1e150,
    allow_nan=False, allow_infinity=False,
)
value_lists = st.lists(finite_values, min_size=2, max_size=200)


def _span_representable(values) -> bool:
    lo, hi = min(values), max(values)
    span = hi - lo
    return span == 0.0 or span >= 1e-300


# ---------------------------------------------------------------------------
# Amplitude-distribution entropy
# ---------------------------------------------------------------------------

@given(values=value_lists, k_bins=st.integers(2, 64))
def test_tie_is_bounded_by_log_bin_count(values, k_bins):
    assume(_span_representable(values))
    entropy = tie(values, k_bins)
    assert 0.0 <= entropy <= math.log2(k_bins) + 1e-12


@given(values=value_lists, k=st.integers(1, 12))
def test_tie_ignores_power_of_two_rescaling(values, k):
    assume(_span_representable(values))
    scaled = [v * 2.0**k for v in values]
    assert tie(scaled) == tie(values)


@given(
    values=st.lists(st.integers(0, 10**6), min_size=2, max_size=200),
    shift=st.integers(-(10**9), 10**9),
)
def test_tie_ignores_integer_shifts(values, shift):
    # Integer doubles below 2**53 subtract exactly, so binning cannot move.
    base = np.array(values, dtype=np.float64)
    assert tie(base + shift) == tie(base)


# ---------------------------------------------------------------------------
# Frequency peak-to-average ratio
# ---------------------------------------------------------------------------

@given(values=value_lists)
def test_fpar_is_at_least_one(values):
    assume(any(v != 0.0 for v in values))
    assert fpar(values) >= 1.0 - 1e-12


@given(values=value_lists, k=st.integers(1, 12))
def test_fpar_ignores_power_of_two_rescaling(values, k):
    assume(any(v != 0.0 for v in values))
    scaled = [v * 2.0**k for v in values]
    assert fpar(scaled) == fpar(values)


@given(
    seed=st.integers(0, 2**31),
    scale=st.floats(min_value=1e-3, max_value=1e3,
                    allow_nan=False, allow_infinity=False),
)
def test_fpar_is_scale_free(seed, scale):
    x = np.random.default_rng(seed).uniform(0.1, 10.0, 256)
    a, b = fpar(x), fpar(x * scale)
    assert abs(a - b) <= 1e-9 * a


# ---------------------------------------------------------------------------
# Hurst exponent
# ---------------------------------------------------------------------------

@given(seed=st.integers(0, 2**31), k=st.integers(1, 12))
def test_the_ignores_power_of_two_rescaling(seed, k):
    x = np.random.default_rng(seed).uniform(0.0, 100.0, 512)
    grid = (8, 16, 32, 64)
    assert the(x * 2.0**k, grid) == the(x, grid)


@given(
    seed=st.integers(0, 2**31),
    shift=st.floats(min_value=-1000.0, max_value=1000.0,
                    allow_nan=False, allow_infinity=False),
)
def test_the_is_shift_stable(seed, shift):
    # Range statistics subtract block means, so an offset only perturbs
    # rounding; no exact identity here, just stability.
    x = np.random.default_rng(seed).uniform(0.0, 100.0, 512)
    grid = (8, 16, 32, 64)
    assert abs(the(x + shift, grid) - the(x, grid)) <= 1e-9


# ---------------------------------------------------------------------------
# Segmentation
# ---------------------------------------------------------------------------

@given(
    n=st.integers(16, 3000),
    window=st.integers(2, 512),
    d=st.integers(1, 128),
)
def test_segment_count_and_placement(n, window, d):
    assume(window <= n and d <= window)
    cell = ComplexSeries(
        samples=np.zeros(n, dtype=np.complex128),
        sample_rate_hz=1000.0,
        role=CellRole.CLUTTER_ONLY,
        index=3,
    )
    segments = segment_cell(cell, d=d, window=window)
    assert len(segments) == (n - window) // d + 1
    for rank, seg in enumerate(segments):
        assert seg.start_index == rank * d
        assert seg.amplitudes.shape == (window,)
        assert seg.label is Label.CLUTTER
        assert seg.source_cell == 3
    assert segments[-1].start_index + window <= n


# ---------------------------------------------------------------------------
# Kernel
# ---------------------------------------------------------------------------

coords = st.lists(
    st.floats(min_value=-1e6, max_value=1e6,
              allow_nan=False, allow_infinity=False),
    min_size=3, max_size=3,
)


@given(
    a=coords, b=coords,
    delta=st.floats(min_value=1e-2, max_value=1e2,
                    allow_nan=False, allow_infinity=False),
    form=st.sampled_from(["paper", "gaussian"]),
)
def test_kernel_symmetry_and_range(a, b, delta, form):
    config = KernelConfig(delta, form)
    k_ab = rbf_kernel(a, b, config)
    assert rbf_kernel(b, a, config) == k_ab
    assert 0.0 <= k_ab <= 1.0          # underflow to 0 is legitimate
    assert rbf_kernel(a, a, config) == 1.0


# ---------------------------------------------------------------------------
# Training invariants
# ---------------------------------------------------------------------------

@given(seed=st.integers(0, 2**31))
@settings(max_examples=25, deadline=None)
def test_training_respects_dual_constraints(seed):
    rng = np.random.default_rng(seed)
    X, y = random_problem(rng)
    beta0 = float(rng.uniform(0.3, 10.0))
    beta1 = float(rng.uniform(0.3, 10.0))
    model = train_arrays(
        X, y, KernelConfig(1.0),
        TrainConfig(beta0=beta0, beta1=beta1, kkt_tol=1e-4,
                    max_passes=200_000),
    )
    assert model.training_meta.converged
    assert abs(float(np.sum(model.alphas * model.labels))) <= 1e-8
    caps = np.where(model.labels > 0, beta1, beta0)
    assert np.all(model.alphas > 0.0)          # only support vectors stored
    assert np.all(model.alphas <= caps)


# ---------------------------------------------------------------------------
# Split and normalization
# ---------------------------------------------------------------------------

@given(
    n_targets=st.integers(1, 300),
    n_clutter=st.integers(1, 100),
    fraction=st.floats(min_value=0.05, max_value=0.95),
    seed=st.integers(0, 2**31),
)
def test_split_partitions_targets(n_targets, n_clutter, fraction, seed):
    vectors = (
        [FeatureVector(float(i), 0.0, 0.0, Label.TARGET)
         for i in range(n_targets)]
        + [FeatureVector(-1.0 - i, 0.0, 0.0, Label.CLUTTER)
           for i in range(n_clutter)]
    )
    train, test = split(vectors, SplitSpec(fraction, seed=seed))
    train_targets = [v for v in train if v.label is Label.TARGET]
    assert len(train_targets) == int(fraction * n_targets)
    assert len(train_targets) + len(test) == n_targets
    assert sum(1 for v in train if v.label is Label.CLUTTER) == n_clutter
    seen = sorted(v.tie for v in train_targets) + sorted(v.tie for v in test)
    assert sorted(seen) == [float(i) for i in range(n_targets)]


@given(seed=st.integers(0, 2**31))
def test_normalization_round_trips(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(0.0, 1.0, (30, 3)) * rng.uniform(0.5, 20.0, 3) \
        + rng.uniform(-50.0, 50.0, 3)
    y = np.concatenate([np.ones(15), -np.ones(15)])
    vectors = make_vectors(X, y)
    stats = fit_normalization(vectors)
    Z = (X - stats.mean) / stats.std
    assert np.allclose(Z * stats.std + stats.mean, X, atol=1e-9)
    first = apply_normalization(vectors[0], stats)
    assert np.allclose(first.as_array(), Z[0], atol=1e-12)
    assert first.label is vectors[0].label
    assert np.allclose(Z.mean(axis=0), 0.0, atol=1e-9)
    assert np.allclose(
        np.sqrt(np.mean((Z - Z.mean(axis=0)) ** 2, axis=0)), 1.0, atol=1e-9
    )
