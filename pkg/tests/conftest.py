"""Shared fixtures: synthetic corpora are expensive, so they are built once.

The seed-42 sets back the convergence, monotonicity, and detector-ordering
checks; everything else runs on purpose-built tiny inputs.
"""

from __future__ import annotations

import numpy as np
import pytest

from farsvm import (
    FeatureVector,
    Label,
    SplitSpec,
    extract_batch,
    segment_dataset,
    split,
    synthesize_dataset,
)


def synth_features(seed: int, scr_db: float, n_cells: int,
                   n_samples: int = 2**17) -> list[FeatureVector]:
    dataset = synthesize_dataset(
        seed=seed, scr_db=scr_db, n_cells=n_cells, n_samples=n_samples
    )
    return extract_batch(segment_dataset(dataset))


@pytest.fixture(scope="session")
def features42():
    """Seed-42, SCR 10 dB, 12 cells: 1985 target + 21835 clutter vectors."""
    return synth_features(42, 10.0, 12)


@pytest.fixture(scope="session")
def features42_scr0():
    """Same geometry at SCR 0 dB for the hard-detection comparisons."""
    return synth_features(42, 0.0, 12)


@pytest.fixture(scope="session")
def features42_10cell():
    """Seed-42, SCR 10 dB, 10 cells (the controller contract's corpus)."""
    return synth_features(42, 10.0, 10)


@pytest.fixture(scope="session")
def split42(features42):
    return split(features42, SplitSpec(target_train_fraction=0.5, seed=0))


@pytest.fixture(scope="session")
def split42_scr0(features42_scr0):
    return split(features42_scr0, SplitSpec(target_train_fraction=0.5, seed=0))


@pytest.fixture
def toy4():
    """Four separable points: two targets above, two clutter below."""
    return [
        FeatureVector(1.0, 1.0, 1.0, Label.TARGET),
        FeatureVector(1.0, 1.0, 0.9, Label.TARGET),
        FeatureVector(-1.0, -1.0, -1.0, Label.CLUTTER),
        FeatureVector(-1.0, -1.0, -0.9, Label.CLUTTER),
    ]


@pytest.fixture
def overlap_set():
    """Two overlapping Gaussian clouds, 60 points per class, fixed seed."""
    rng = np.random.default_rng(5)
    X = np.vstack([
        rng.normal(+0.6, 1.0, (60, 3)),
        rng.normal(-0.6, 1.0, (60, 3)),
    ])
    y = np.concatenate([np.ones(60), -np.ones(60)])
    return X, y
