"""
Information-theoretic quantities on finite tables.

Joint distributions are tables pi[x][y] over X x Y with x-marginal P (row sums)
and y-marginal Q (column sums). Everything is computed in nats and converted to
the requested base on the way out; divergent values are returned as +inf.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import entr, logsumexp, rel_entr, softmax

from thermoinfo import config
from thermoinfo.errors import DIVERGENT, InvalidInput, NotNormalized

logger = logging.getLogger(__name__)

_BASES = {"e": 1.0, "2": math.log(2.0), "10": math.log(10.0)}

# backtracking steps per Newton iteration in the variational oracle
_MAX_HALVINGS = 40


def log_base(base):
    """Natural log of a logarithm base given as "e", 2, 10 or any number > 1."""
    if base is None:
        return 1.0
    key = str(base).strip().lower()
    if key in _BASES:
        return _BASES[key]
    try:
        value = float(base)
    except (TypeError, ValueError):
        raise InvalidInput(f"unknown logarithm base {base!r}") from None
    if value <= 1.0:
        raise InvalidInput(f"logarithm base must be > 1, got {base!r}")
    return math.log(value)


def to_base(value, base):
    """Convert a value in nats to the given base (the +inf sentinel passes through)."""
    if value == DIVERGENT:
        return DIVERGENT
    return float(value) / log_base(base)


def as_probability_vector(p, name="probability vector"):
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise InvalidInput(f"{name} must be a nonempty vector")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise InvalidInput(f"{name} entries must be finite and >= 0")
    if abs(p.sum() - 1.0) > config.PROBABILITY_TOL * max(1, p.size):
        raise InvalidInput(f"{name} must sum to 1 (sums to {p.sum():.17g})")
    return p


@dataclass(frozen=True)
class JointDistribution:
    """Finite joint law pi[x][y]; the marginals are always recomputed from the table."""

    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.ndim != 2 or t.shape[0] < 1 or t.shape[1] < 1:
            raise InvalidInput(f"joint distribution must be a 2-d table, got shape {t.shape}")
        if not np.all(np.isfinite(t)) or np.any(t < 0):
            raise InvalidInput("joint distribution entries must be finite and >= 0")
        if abs(t.sum() - 1.0) > config.PROBABILITY_TOL * max(1, t.size):
            raise InvalidInput(f"joint distribution must sum to 1 (sums to {t.sum():.17g})")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def P(self):
        return self.table.sum(axis=1)

    @property
    def Q(self):
        return self.table.sum(axis=0)

    @property
    def shape(self):
        return self.table.shape


@dataclass(frozen=True)
class ProbabilityKernel:
    """Family of probabilities on X indexed by y: table[y][x], each row summing to 1."""

    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float)
        if t.ndim != 2:
            raise InvalidInput("probability kernel must be a 2-d table indexed [y][x]")
        if not np.all(np.isfinite(t)) or np.any(t < 0):
            raise InvalidInput("probability kernel entries must be finite and >= 0")
        worst = np.max(np.abs(t.sum(axis=1) - 1.0))
        if worst > config.PROBABILITY_TOL * max(1, t.shape[1]):
            raise InvalidInput(f"every kernel row must sum to 1 (worst deviation {worst:.3e})")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def constant(cls, nu, r):
        """The kernel that uses the same probability nu on every fiber."""
        nu = as_probability_vector(nu, "a priori probability")
        return cls(np.tile(nu, (r, 1)))

    @classmethod
    def tilted(cls, nu, phi0):
        """Kernel exp(phi0[x][y]) nu[x] for a nu-normalized phi0."""
        nu = np.asarray(nu, dtype=float)
        phi0 = np.asarray(phi0, dtype=float)
        return cls((np.exp(phi0) * nu[:, None]).T)


@dataclass(frozen=True)
class JacobianTable:
    """J[x][y] = pi[x][y] / Q[y]; ``defined[y]`` is False on columns with Q[y] = 0 (filled uniformly)."""

    table: np.ndarray
    defined: np.ndarray


def shannon_entropy(P, base="e"):
    """S(P) = -sum p log p with 0 log 0 = 0."""
    P = as_probability_vector(P)
    return to_base(entr(P).sum(), base)


def joint_jacobian(pi):
    """Column-normalized Jacobian of pi; columns with no mass are uniform and flagged."""
    Q = pi.Q
    defined = Q > 0
    d = pi.shape[0]
    table = np.full(pi.shape, 1.0 / d)
    table[:, defined] = pi.table[:, defined] / Q[defined]
    if not np.all(defined):
        logger.debug("joint has %d zero-mass columns; Jacobian filled uniformly there",
                     np.count_nonzero(~defined))
    return JacobianTable(table, defined)


def conditional_entropy(pi, base="e"):
    """H(pi) = sum_y Q[y] S(J[., y]) = -sum pi log J."""
    jac = joint_jacobian(pi)
    per_column = entr(jac.table).sum(axis=0)
    return to_base(np.dot(pi.Q[jac.defined], per_column[jac.defined]), base)


def mutual_information(pi, base="e"):
    """sum pi log(pi / (P Q))."""
    reference = np.outer(pi.P, pi.Q)
    return to_base(rel_entr(pi.table, reference).sum(), base)


def information_gain(pi, base="e"):
    """
    IG(pi, P) = S(P) - H(pi).

    Also evaluated as the mutual information. The two routes are compared but not
    asserted: a disagreement beyond 1e-12 is logged as a WARNING and the S(P) - H(pi)
    value is returned.
    """
    gain = entr(pi.P).sum() - conditional_entropy(pi)
    mutual = mutual_information(pi)
    if abs(gain - mutual) > config.PROBABILITY_TOL:
        logger.warning("information gain routes disagree: S(P)-H(pi)=%.17g, mutual=%.17g", gain, mutual)
    return to_base(gain, base)


def kl_divergence(P, nu, base="e"):
    """D_KL(P | nu); +inf when P charges a symbol where nu vanishes."""
    P = as_probability_vector(P)
    nu = as_probability_vector(nu, "reference probability")
    if nu.shape != P.shape:
        raise InvalidInput(f"shapes differ: {P.shape} vs {nu.shape}")
    return to_base(rel_entr(P, nu).sum(), base)


def relative_shannon_entropy(P, nu, base="e"):
    """S^nu(P) = -D_KL(P | nu) for any positive weight vector nu (probability or counting)."""
    P = as_probability_vector(P)
    nu = np.asarray(nu, dtype=float)
    return to_base(-rel_entr(P, nu).sum(), base)


def relative_conditional_entropy(pi, nu, base="e"):
    """
    H^nu(pi) = -D_KL(pi | nu x Q) for positive weights nu on X.

    With counting weights this is H(pi); uniform probability weights give H(pi) - log d.
    """
    nu = np.asarray(nu, dtype=float)
    if nu.shape != (pi.shape[0],):
        raise InvalidInput("a priori weights must match the x-axis of the joint")
    reference = np.outer(nu, pi.Q)
    return to_base(-rel_entr(pi.table, reference).sum(), base)


def kernel_information_gain(pi, kernel, base="e"):
    """IG(pi, kernel) = D_KL(pi | kernel dQ); +inf on absolute-continuity failure."""
    if kernel.table.shape != (pi.shape[1], pi.shape[0]):
        raise InvalidInput(
            f"kernel must be indexed [y][x] with shape {(pi.shape[1], pi.shape[0])}, got {kernel.table.shape}"
        )
    reference = kernel.table.T * pi.Q[None, :]
    return to_base(rel_entr(pi.table, reference).sum(), base)


def joint_from_density(nu, phi0, Q):
    """The joint exp(phi0[x][y]) nu[x] Q[y] disintegrated by the kernel exp(phi0) nu."""
    nu = np.asarray(nu, dtype=float)
    return JointDistribution(np.exp(np.asarray(phi0, dtype=float)) * np.outer(nu, Q))


def ig_shift(pi, nu, phi0, base="e", tol=config.CONTRACT_TOL):
    """
    Information gain against the tilted kernel exp(phi0) nu, as
    -sum pi phi0 + IG(pi, nu).

    Raises:
        NotNormalized: if sum_x exp(phi0[x][y]) nu[x] differs from 1 for some y.
    """
    nu = as_probability_vector(nu, "a priori probability")
    try:
        phi0 = np.asarray(phi0, dtype=float)
    except ValueError as exc:
        raise InvalidInput(f"phi0 must be a rectangular table of numbers: {exc}") from exc
    if phi0.shape != pi.shape:
        raise InvalidInput(f"phi0 must have the joint's shape {pi.shape}, got {phi0.shape}")
    sums = np.exp(phi0).T @ nu
    worst = np.max(np.abs(sums - 1.0))
    if worst > tol:
        raise NotNormalized(f"phi0 is not nu-normalized on every fiber (worst deviation {worst:.3e})")

    base_gain = kernel_information_gain(pi, ProbabilityKernel.constant(nu, pi.shape[1]))
    if base_gain == DIVERGENT:
        return DIVERGENT
    return to_base(base_gain - float(np.sum(pi.table * phi0)), base)


def _column_values(J, g):
    return (J * (g - logsumexp(g, axis=0, keepdims=True))).sum(axis=0)


def variational_entropy_oracle(pi, iters=100, step=1.0):
    """
    Approximate sup { sum f pi : sum_x exp(f(x, y)) = 1 for all y } in nats.

    f is parameterized as g - logsumexp_x(g), which covers the feasible set
    exactly, and each fiber is driven by damped Newton steps g += t (J/s - 1),
    s = softmax(g), with backtracking on t. Entries where pi vanishes are pushed to
    -inf at a geometric rate, matching the epsilon-perturbation argument for
    tables with zeros. The supremum is -H(pi).
    """
    if iters < 1:
        raise InvalidInput("iters must be >= 1")
    Q = pi.Q
    active = Q > 0
    J = pi.table[:, active] / Q[active]
    g = np.zeros_like(J)

    for _ in range(iters):
        s = softmax(g, axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            direction = np.where(J > 0, J / np.maximum(s, np.finfo(float).tiny), 0.0) - 1.0
        current = _column_values(J, g)
        t = np.full(J.shape[1], float(step))
        for _ in range(_MAX_HALVINGS):
            accepted = _column_values(J, g + t * direction) >= current
            if np.all(accepted):
                break
            t = np.where(accepted, t, 0.5 * t)
        else:
            t = np.where(accepted, t, 0.0)
        g = g + t * direction

    value = float(np.dot(Q[active], _column_values(J, g)))
    logger.debug("variational oracle value %.17g after %d iterations", value, iters)
    return value
