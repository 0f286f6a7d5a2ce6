"""Shared fixtures for the test suite.

The expensive session-scoped fixtures (desk corpus, training pairs, fitted
parameters) are shared between the training/harness tests and the acceptance
suite so the slow work runs once per session.
"""

import numpy as np
import pytest

from mesh2grid import (
    Method,
    fit_parameters,
    make_mesh,
    make_training_pairs,
    synthetic_corpus,
)


def random_mesh(seed, n, width, height):
    """Uniform random mesh with positions strictly inside the half-open box."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, width - 1e-6, n)
    y = rng.uniform(0.0, height - 1e-6, n)
    values = rng.uniform(0.0, 1.0, n)
    return make_mesh(x, y, values, (width, height))


@pytest.fixture
def mesh_factory():
    return random_mesh


@pytest.fixture(scope="session")
def desk_corpus():
    # 5 structured 512x512 scenes; deterministic.
    return synthetic_corpus(count=5, size=512, seed=0)


@pytest.fixture(scope="session")
def training_pairs(desk_corpus):
    return make_training_pairs(desk_corpus, ratios=[0.3, 0.5], seed=0, phi=5)


@pytest.fixture(scope="session")
def fitted_results(training_pairs):
    # One exhaustive fit per method over the default grids.
    return {m: fit_parameters(training_pairs, m) for m in Method}


@pytest.fixture(scope="session")
def small_corpus():
    # Cheap corpus for unit tests that need real image content.
    return synthetic_corpus(count=2, size=160, seed=3)


@pytest.fixture(scope="session")
def small_pairs(small_corpus):
    return make_training_pairs(small_corpus, ratios=[0.4], seed=1, phi=4)
