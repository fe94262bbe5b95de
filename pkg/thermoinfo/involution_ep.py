"""
Involution kernels, dual potentials and entropy production for depth <= 2 potentials.

A depth-2 potential A(x_1, x_2) has the canonical involution kernel
W(y_1, x_1) = A(y_1, x_1); adding a gauge g(y_1) to W changes the dual potential
by the coboundary g(j) - g(i). Dual potentials are written on the one-sided shift,
so a_minus(i, j) = A(j, i) + g(j) - g(i).
"""

import enum
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import rel_entr

from thermoinfo import config
from thermoinfo.errors import DIVERGENT, InvalidInput
from thermoinfo.finite_thermo import (
    AprioriWeights,
    Potential,
    equilibrium_measure,
    integrate,
    jacobian_potential,
    normalize_potential,
    relative_entropy,
    spectral_data,
)
from thermoinfo.symbolic_core import (
    cylinder_masses,
    reverse_measure,
    sample_orbit,
    two_cylinder_marginal,
)

logger = logging.getLogger(__name__)


class GainRoute(str, enum.Enum):
    PRESSURE_FORMULA = "pressure_formula"
    CYLINDER_SUM = "cylinder_sum"
    ORBIT_MONTE_CARLO = "orbit_monte_carlo"


@dataclass(frozen=True)
class InvolutionData:
    """Kernel W[y_1][x_1], dual potential a_minus and the gauge g used to build them."""

    W: np.ndarray
    a_minus: Potential
    gauge: np.ndarray

    def cocycle_defect(self, A):
        """max over (y_2, y_1, x_1) of |a_minus(y_1, y_2) - A(y_1, x_1) - W(y_2, y_1) + W(y_1, x_1)|."""
        A = _depth_two(A).table
        W = self.W
        # axes: y2, y1, x1
        rhs = A[None, :, :] + W[:, :, None] - W[None, :, :]
        lhs = self.a_minus.table.T[:, :, None]
        return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True)
class SymmetryReport:
    symmetric: bool
    strict: bool
    gauge: Optional[np.ndarray]


@dataclass(frozen=True)
class GainReport:
    value: float
    route: GainRoute
    n: int
    stderr: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInput("depth n must be >= 1")
        if not self.stderr >= 0:
            raise InvalidInput("standard error must be >= 0")


def _depth_two(A):
    if A.depth > 2:
        raise InvalidInput(f"involution kernels are implemented for depth <= 2, got depth {A.depth}")
    return A.as_depth(2)


def involution_kernel(A, gauge=None):
    """
    Involution kernel and dual potential of a depth <= 2 potential.

    Without a gauge this is the canonical choice W = A, giving the transpose
    potential; a gauge g gives W(y_1, x_1) = A(y_1, x_1) + g(y_1).
    """
    table = _depth_two(A).table
    d = table.shape[0]
    g = np.zeros(d) if gauge is None else np.asarray(gauge, dtype=float)
    if g.shape != (d,):
        raise InvalidInput(f"gauge must have {d} entries")
    W = table + g[:, None]
    a_minus = Potential(table.T + g[None, :] - g[:, None])
    return InvolutionData(W, a_minus, g)


def is_symmetric(A, nu=None, tol=config.CONTRACT_TOL):
    """
    Symmetry up to the involution-kernel gauge: is there g with
    A(i, j) = A(j, i) + g(j) - g(i)? Symmetry does not depend on the a priori weights.

    Returns a SymmetryReport; the witness is pinned by g(0) = 0 and ``strict``
    reports plain transpose symmetry.
    """
    table = _depth_two(A).table
    if nu is not None and nu.size != table.shape[0]:
        raise InvalidInput("potential and a priori weights live on different alphabets")
    skew = table - table.T
    strict = bool(np.max(np.abs(skew)) <= tol)
    g = skew[0, :].copy()
    defect = np.max(np.abs(skew - (g[None, :] - g[:, None])))
    if defect <= tol:
        return SymmetryReport(True, strict, g)
    return SymmetryReport(False, strict, None)


def entropy_production_markov(mu):
    """
    sum_ij pi_i p_ij log(pi_i p_ij / (pi_j p_ji)); +inf when some transition is one-way.
    """
    if mu.block_length != 1:
        raise InvalidInput("entropy production is implemented for ordinary chains")
    flow = two_cylinder_marginal(mu)
    forward, backward = flow > 0, flow.T > 0
    if np.any(forward != backward):
        return DIVERGENT
    safe = np.where(forward, flow, 1.0)
    log_ratio = np.log(safe) - np.log(safe.T)
    # antisymmetric form: every term is >= 0
    return float(0.5 * np.sum((flow - flow.T) * log_ratio))


def entropy_production_potential(A, nu):
    """
    Entropy production of the equilibrium of A as the integral of Abar - Abar^- against it.

    Agreement with the closed Markov formula is checked and logged.
    """
    A = _depth_two(A)
    s = spectral_data(A, nu)
    normalized = normalize_potential(A, s)
    data = involution_kernel(normalized)
    mu = equilibrium_measure(A, nu, s)
    value = float(np.sum(two_cylinder_marginal(mu) * (normalized.table - data.a_minus.table)))

    closed_form = entropy_production_markov(mu)
    if abs(value - closed_form) > config.CONTRACT_TOL:
        logger.warning("entropy production routes disagree: potential=%.17g markov=%.17g", value, closed_form)
    return value


def specific_gain(eta, A, nu):
    """
    Specific information gain of eta with respect to the equilibrium of A:
    log(lambda_A) - integral A d eta - h^nu(eta).
    """
    s = spectral_data(A, nu)
    return float(np.log(s.lam) - integrate(A, eta) - relative_entropy(eta, nu))


def reversed_gain(mu):
    """h(mu, reversed mu) through the pressure formula; equals the entropy production."""
    counting = AprioriWeights.counting(mu.n_states)
    return specific_gain(mu, jacobian_potential(reverse_measure(mu), counting), counting)


def cylinder_gain_estimate(eta, mu, n, limit=config.MAX_ENUMERATION):
    """
    (1/n) D_KL(eta | mu) on the n-cylinders, by exhaustive enumeration.

    Raises:
        EnumerationTooLarge: if d**n exceeds ``limit``.
    """
    if n < 2:
        raise InvalidInput("cylinder depth must be >= 2")
    if eta.alphabet_size != mu.alphabet_size:
        raise InvalidInput("measures live on different alphabets")
    total = rel_entr(cylinder_masses(eta, n, limit), cylinder_masses(mu, n, limit)).sum()
    value = DIVERGENT if total == DIVERGENT else float(total) / n
    return GainReport(value, GainRoute.CYLINDER_SUM, n)


def _log_cylinder(mu, orbit):
    with np.errstate(divide="ignore"):
        return float(np.log(mu.stationary[orbit[0]]) + np.log(mu.transition[orbit[:-1], orbit[1:]]).sum())


def orbit_gain_estimate(eta, mu, n, trials, seed, workers=1):
    """
    Mean and standard error of (1/n) log(eta(C_n(x)) / mu(C_n(x))) over orbits x drawn from eta.

    Trial t samples with child t of ``SeedSequence(seed)``, so the result does not
    depend on ``workers``.
    """
    if trials < 2:
        raise InvalidInput("orbit estimator needs at least 2 trials")
    if eta.block_length != 1 or mu.block_length != 1 or eta.n_states != mu.n_states:
        raise InvalidInput("orbit estimator needs two ordinary chains on the same alphabet")
    children = np.random.SeedSequence(seed).spawn(trials)

    def exponent(child):
        orbit = sample_orbit(eta, n, child)
        return (_log_cylinder(eta, orbit) - _log_cylinder(mu, orbit)) / n

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = np.array(list(pool.map(exponent, children)))
    else:
        values = np.array([exponent(child) for child in children])

    if np.any(np.isinf(values)):
        return GainReport(DIVERGENT, GainRoute.ORBIT_MONTE_CARLO, n, DIVERGENT)
    stderr = float(values.std(ddof=1) / np.sqrt(trials))
    logger.debug("orbit estimator: %d trials of length %d, mean %.6g +- %.2g", trials, n, values.mean(), stderr)
    return GainReport(float(values.mean()), GainRoute.ORBIT_MONTE_CARLO, n, stderr)


def dual_eigenvalue_check(A, nu):
    """Leading eigenvalues of A and of its dual potential; they coincide."""
    data = involution_kernel(A)
    return spectral_data(_depth_two(A), nu).lam, spectral_data(data.a_minus, nu).lam


def reconstruct_eigenfunction(A, nu, data=None):
    """
    Eigenfunction of A rebuilt from the dual side, v(j) = sum_i exp(W(i, j)) rho_{A^-}(i),
    scaled so that sum v rho_A = 1.
    """
    A = _depth_two(A)
    data = involution_kernel(A) if data is None else data
    rho_minus = spectral_data(data.a_minus, nu).rho
    v = np.exp(data.W).T @ rho_minus
    return v / (v @ spectral_data(A, nu).rho)
