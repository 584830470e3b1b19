"""Shared fixtures: canonical parameter sets and seeded RNGs."""

import math

import numpy as np
import pytest

from shellspectra import LatticeGeometry, make_interaction


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def delta_pi():
    """Attractive-side delta lattice with period pi (alpha = 1)."""
    return make_interaction(1.0, 0.0, 1.0, 1.0), LatticeGeometry(d=math.pi)


@pytest.fixture
def delta_unit():
    """Same delta coupling on a unit lattice."""
    return make_interaction(1.0, 0.0, 1.0, 1.0), LatticeGeometry(d=1.0)


@pytest.fixture
def dprime_unit():
    """Pure delta' lattice, beta = 1, unit period."""
    return make_interaction(0.0, 1.0, 1.0, 1.0), LatticeGeometry(d=1.0)


@pytest.fixture
def free_unit():
    """Identity interface: no interaction at all."""
    return make_interaction(0.0, 0.0, 1.0, 1.0), LatticeGeometry(d=1.0)


def random_params(rng, kind=None):
    """One random parameter set satisfying the symplectic constraint.

    kind: 0 delta, 1 intermediate, 2 delta-prime family; None picks uniformly.
    """
    k = int(rng.integers(0, 3)) if kind is None else kind
    if k == 0:
        return make_interaction(float(rng.uniform(-3, 3)), 0.0, 1.0, 1.0)
    if k == 1:
        gamma = float(rng.choice([-1.0, 1.0])) * float(rng.uniform(1.3, 2.2))
        return make_interaction(0.0, 0.0, gamma, 1.0 / gamma)
    alpha = float(rng.uniform(-1, 1))
    beta = float(rng.choice([-1.0, 1.0])) * float(rng.uniform(0.3, 2.0))
    gamma = float(rng.uniform(0.7, 1.4))
    delta = (alpha * beta + 1.0) / gamma
    return make_interaction(alpha, beta, gamma, delta)
