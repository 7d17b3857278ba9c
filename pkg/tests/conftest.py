"""Shared test oracles kept independent of the library code paths."""

import numpy as np
import pytest

from dilatia import ToleranceConfig


def floyd_warshall_closure(m: np.ndarray) -> np.ndarray:
    """Shortest-path closure: turns any nonnegative symmetric zero-diagonal
    matrix into a metric. Independent repair oracle for axiom tests."""
    d = m.astype(float).copy()
    n = d.shape[0]
    for k in range(n):
        d = np.minimum(d, d[:, k:k + 1] + d[k:k + 1, :])
    return d


def random_premetric(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    """Random symmetric nonnegative zero-diagonal matrix (not yet a metric)."""
    a = rng.uniform(0.1, scale, size=(n, n))
    m = 0.5 * (a + a.T)
    np.fill_diagonal(m, 0.0)
    return m


@pytest.fixture
def cfg():
    return ToleranceConfig(sample_pairs=60, seed=0)
