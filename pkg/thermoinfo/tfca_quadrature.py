"""
Compact-alphabet model on M = [0, 1] by Nystrom discretization.

The a priori probability on [0, 1] is replaced by a quadrature rule; a continuous
potential A(x_1, x_2) becomes the depth-2 table A(a_i, a_j) on the nodes, and
every operator is then the finite one with the quadrature weights as a priori
weights. The approximation honors supp(nu) = [0, 1] only as the node count grows.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial
from scipy import special

from thermoinfo import config
from thermoinfo.errors import InvalidInput
from thermoinfo.finite_thermo import (
    AprioriWeights,
    Potential,
    equilibrium_measure,
    integrate,
    normalize_potential,
    spectral_data,
    transfer_matrix,
)
from thermoinfo.involution_ep import entropy_production_potential
from thermoinfo.symbolic_core import MarkovMeasure

logger = logging.getLogger(__name__)

RULES = ("midpoint", "gauss-legendre", "custom")
FAMILIES = ("constant", "separable", "bilinear", "cosine", "tabulated")


@dataclass(frozen=True)
class QuadratureMeasure:
    nodes: np.ndarray
    weights: np.ndarray
    rule: str = "custom"

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if self.rule not in RULES:
            raise InvalidInput(f"unknown quadrature rule {self.rule!r}; expected one of {RULES}")
        if nodes.ndim != 1 or nodes.shape != weights.shape or nodes.size < 2:
            raise InvalidInput("nodes and weights must be vectors of the same length >= 2")
        if np.any(nodes < 0) or np.any(nodes > 1) or np.any(np.diff(nodes) <= 0):
            raise InvalidInput("nodes must be strictly increasing in [0, 1]")
        if np.any(weights <= 0) or abs(weights.sum() - 1.0) > config.QUADRATURE_WEIGHT_TOL:
            raise InvalidInput("weights must be positive and sum to 1")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self):
        return self.nodes.size

    def apriori(self):
        return AprioriWeights(self.weights)


def quadrature_measure(rule, n):
    """Midpoint or Gauss-Legendre rule with n nodes on [0, 1]."""
    if n < config.MIN_QUADRATURE_NODES:
        raise InvalidInput(f"quadrature rules need at least {config.MIN_QUADRATURE_NODES} nodes, got {n}")
    if rule == "midpoint":
        nodes = (np.arange(n) + 0.5) / n
        weights = np.full(n, 1.0 / n)
    elif rule == "gauss-legendre":
        roots, weights = special.roots_legendre(n)
        nodes = 0.5 * (roots + 1.0)
        weights = 0.5 * weights
    else:
        raise InvalidInput(f"unknown quadrature rule {rule!r}; expected 'midpoint' or 'gauss-legendre'")
    return QuadratureMeasure(nodes, weights / weights.sum(), rule)


@dataclass(frozen=True)
class ContinuousPotential:
    """
    Potential A(x_1, x_2) on [0, 1]^2.

    Families and their parameters:
        constant   c
        separable  coefficients (polynomial f(x_1) = sum c_k x_1**k)
        bilinear   alpha, beta, gamma  (alpha x_1 x_2 + beta x_1 + gamma x_2)
        cosine     alpha               (alpha cos(2 pi (x_1 - x_2)))
        tabulated  grid                (values on the node grid)
    """

    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidInput(f"unknown potential family {self.family!r}; expected one of {FAMILIES}")

    def evaluate(self, x1, x2):
        x1, x2 = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))
        p = self.params
        if self.family == "constant":
            return np.full(x1.shape, float(p.get("c", 0.0)))
        if self.family == "separable":
            return polynomial.polyval(x1, np.asarray(p.get("coefficients", [0.0]), dtype=float))
        if self.family == "bilinear":
            return p.get("alpha", 0.0) * x1 * x2 + p.get("beta", 0.0) * x1 + p.get("gamma", 0.0) * x2
        if self.family == "cosine":
            return p.get("alpha", 0.0) * np.cos(2.0 * np.pi * (x1 - x2))
        raise InvalidInput("tabulated potentials are only defined on their node grid")


def tfca_potential_table(A, q):
    """The depth-2 node potential A(a_i, a_j)."""
    if A.family == "tabulated":
        grid = np.asarray(A.params.get("grid"), dtype=float)
        if grid.shape != (q.size, q.size):
            raise InvalidInput(f"tabulated grid must be {q.size} x {q.size}, got {grid.shape}")
        return Potential(grid)
    x1, x2 = np.meshgrid(q.nodes, q.nodes, indexing="ij")
    return Potential(A.evaluate(x1, x2))


def _discretize(A, q):
    if q.rule != "custom" and q.size < config.MIN_QUADRATURE_NODES:
        raise InvalidInput(f"quadrature rules need at least {config.MIN_QUADRATURE_NODES} nodes")
    return tfca_potential_table(A, q), q.apriori()


def nystrom_spectral(A, q):
    """Eigen-triple of the Nystrom matrix B[j][i] = exp(A(a_i, a_j)) w_i."""
    table, nu = _discretize(A, q)
    s = spectral_data(table, nu)
    logger.debug("nystrom %s rule with %d nodes: lambda=%.17g", q.rule, q.size, s.lam)
    return s


@dataclass(frozen=True)
class TfcaEquilibrium:
    """Column-normalized kernel G[i][j] = exp(Abar(a_i, a_j)) w_i and the node chain it defines."""

    kernel: np.ndarray
    density: np.ndarray
    normalized: Potential
    measure: MarkovMeasure


def tfca_equilibrium(A, q):
    table, nu = _discretize(A, q)
    s = spectral_data(table, nu)
    normalized = normalize_potential(table, s)
    kernel = transfer_matrix(normalized, nu).T
    measure = equilibrium_measure(table, nu, s)
    return TfcaEquilibrium(kernel, measure.stationary, normalized, measure)


def tfca_entropy(A, q):
    """Relative entropy h^nu(mu_A) = -integral of Abar against the node equilibrium."""
    eq = tfca_equilibrium(A, q)
    return -integrate(eq.normalized, eq.measure)


def tfca_entropy_production(A, q):
    """Entropy production of the node equilibrium through the dual potential Abar(x_2, x_1)."""
    table, nu = _discretize(A, q)
    return entropy_production_potential(table, nu)
