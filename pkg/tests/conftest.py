"""Shared generators for randomized property tests (seeded, reproducible)."""

import numpy as np
import pytest

from baryscore import DiscreteMeasure, LayeredEmbedding


def random_measure(rng, max_points=10, max_dim=8, dim=None, uniform=False,
                   n_points=None):
    n = n_points if n_points is not None else int(rng.integers(1, max_points + 1))
    d = dim if dim is not None else int(rng.integers(1, max_dim + 1))
    support = rng.normal(size=(n, d)) * rng.choice([0.3, 1.0, 3.0])
    if uniform:
        weights = np.full(n, 1.0 / n)
    else:
        weights = rng.random(n) + 0.05
        weights /= weights.sum()
    return DiscreteMeasure(support, weights)


def random_embedding(rng, text_id, max_layers=4, max_tokens=12, max_dim=32,
                     n_layers=None, n_tokens=None, dim=None, layer_spread=0.3):
    """A synthetic LayeredEmbedding whose layers look like encoder layers:
    a shared base point cloud plus small per-layer perturbations."""
    L = n_layers if n_layers is not None else int(rng.integers(1, max_layers + 1))
    n = n_tokens if n_tokens is not None else int(rng.integers(1, max_tokens + 1))
    d = dim if dim is not None else int(rng.integers(2, max_dim + 1))
    base = rng.normal(size=(n, d))
    tensor = np.stack(
        [base + layer_spread * rng.normal(size=(n, d)) for _ in range(L)]
    )
    tokens = [f"tok{rng.integers(0, 50)}" for _ in range(n)]
    return LayeredEmbedding(text_id, tokens, tensor)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
