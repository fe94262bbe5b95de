import numpy as np
import pytest

from thermoinfo.finite_thermo import AprioriWeights, Potential
from thermoinfo.info_gain import JointDistribution
from thermoinfo.symbolic_core import MarkovMeasure

TWO_STATE = [[0.9, 0.1], [0.3, 0.7]]
THREE_CYCLE = [[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]
ROTATING = [[0.1, 0.6, 0.3], [0.3, 0.1, 0.6], [0.6, 0.3, 0.1]]
BOX = [[0.10, 0.20], [0.45, 0.25]]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def make_chain():
    """Random positive (hence irreducible) chain on d states."""

    def build(rng, d=3):
        return MarkovMeasure.from_transition(rng.dirichlet(np.ones(d), size=d))

    return build


@pytest.fixture
def make_potential():
    def build(rng, d=3, depth=2, scale=1.0):
        return Potential(scale * rng.normal(size=(d,) * depth))

    return build


@pytest.fixture
def make_weights():
    def build(rng, d=3):
        return AprioriWeights(rng.dirichlet(np.ones(d)))

    return build


@pytest.fixture
def make_joint():
    """Random joint table; ``zeros`` entries are set to 0 before renormalizing."""

    def build(rng, r=4, c=4, zeros=0):
        table = rng.random((r, c)) + 0.05
        if zeros:
            flat = rng.choice(r * c, size=zeros, replace=False)
            table.reshape(-1)[flat] = 0.0
        return JointDistribution(table / table.sum())

    return build


def markov_potential(mu):
    """A(i, j) = log(pi_i p_ij / pi_j), normalized for counting weights."""
    pi = mu.stationary
    return Potential(np.log(pi[:, None] * mu.transition / pi[None, :]))
