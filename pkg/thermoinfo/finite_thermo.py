"""
Ruelle transfer operator on a finite alphabet with an a priori weight vector.

Potentials are locally constant: a depth-k potential is a table over words of
length k, A(x_1, ..., x_k). The operator prepends a symbol,

    (L f)(x) = sum_a exp(A(a x)) f(a x) nu_a,

so for k >= 2 it acts on functions of the first k-1 symbols, and for k = 1 on
constants. All spectral work is done on that (k-1)-block state space.
"""

import logging
from dataclasses import dataclass

import numpy as np

from thermoinfo import config
from thermoinfo.errors import ConvergenceFailure, InvalidInput
from thermoinfo.symbolic_core import (
    Alphabet,
    MarkovMeasure,
    cylinder_masses,
    ks_entropy,
    stationary_distribution,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Potential:
    """Locally constant potential of depth k, stored as an array of shape (d,) * k."""

    table: np.ndarray

    def __post_init__(self):
        table = np.array(self.table, dtype=float)
        if table.ndim < 1:
            raise InvalidInput("potential table needs at least one axis")
        d = Alphabet(table.shape[0]).size
        if any(n != d for n in table.shape):
            raise InvalidInput(f"potential table must have shape (d,)*k, got {table.shape}")
        if not np.all(np.isfinite(table)):
            raise InvalidInput("potential values must be finite")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @classmethod
    def from_flat(cls, values, d):
        """Build from the d**k values listed in lexicographic word order."""
        d = Alphabet(d).size
        values = np.asarray(values, dtype=float).reshape(-1)
        k = 1
        while d ** k < values.size:
            k += 1
        if d ** k != values.size:
            raise InvalidInput(f"{values.size} values is not d**k for d={d}")
        return cls(values.reshape((d,) * k))

    @classmethod
    def constant(cls, c, d, depth=1):
        return cls(np.full((d,) * depth, float(c)))

    @property
    def depth(self):
        return self.table.ndim

    @property
    def alphabet_size(self):
        return self.table.shape[0]

    @property
    def flat(self):
        return self.table.reshape(-1)

    def __call__(self, *word):
        return float(self.table[tuple(word[:self.depth])])

    def as_depth(self, k):
        """The same function viewed as a depth-k table (k >= depth)."""
        if k < self.depth:
            raise InvalidInput("cannot lower the depth of a potential")
        extra = (self.alphabet_size,) * (k - self.depth)
        return Potential(np.broadcast_to(self.table.reshape(self.table.shape + (1,) * len(extra)),
                                         self.table.shape + extra))

    def shifted(self, c):
        return Potential(self.table + c)


@dataclass(frozen=True)
class AprioriWeights:
    """Positive weights on the alphabet: a probability or a finite measure such as counting."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1:
            raise InvalidInput("a priori weights must be a vector")
        Alphabet(w.size)
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise InvalidInput("a priori weights must be finite and > 0")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def counting(cls, d):
        return cls(np.ones(d))

    @classmethod
    def uniform(cls, d):
        return cls(np.full(d, 1.0 / d))

    @property
    def size(self):
        return self.weights.size

    @property
    def total_mass(self):
        return float(self.weights.sum())

    @property
    def is_probability(self):
        return abs(self.total_mass - 1.0) <= config.PROBABILITY_TOL


@dataclass(frozen=True)
class SpectralData:
    """
    Leading eigen-triple of the transfer operator.

    ``h`` and ``rho`` are indexed by words of length k-1 in lexicographic order
    (a single entry when k = 1); ``rho`` is a probability and sum(h * rho) = 1.
    """

    lam: float
    h: np.ndarray
    rho: np.ndarray

    @property
    def pressure(self):
        return float(np.log(self.lam))


def _check_compatible(A, nu):
    if A.alphabet_size != nu.size:
        raise InvalidInput(
            f"potential is over {A.alphabet_size} symbols but a priori weights over {nu.size}"
        )


def transfer_matrix(A, nu):
    """
    Matrix of L_{A,nu} on functions of the first k-1 symbols.

    Row b' (the current context) has entry exp(A(a b')) nu_a in the column of the
    context a b'[:-1]. For k = 1 the matrix is 1 x 1.
    """
    _check_compatible(A, nu)
    d, k = A.alphabet_size, A.depth
    w = nu.weights
    if k == 1:
        return np.array([[np.dot(np.exp(A.table), w)]])

    m = d ** (k - 1)
    rows = np.arange(m)
    matrix = np.zeros((m, m))
    values = np.exp(A.flat).reshape(d, m)
    for a in range(d):
        cols = a * d ** (k - 2) + rows // d
        matrix[rows, cols] = values[a] * w[a]
    return matrix


def transfer_apply(A, nu, f):
    """Apply L_{A,nu} to a function table over (k-1)-words (size 1 for k = 1)."""
    matrix = transfer_matrix(A, nu)
    f = np.asarray(f, dtype=float).reshape(-1)
    if f.size != matrix.shape[1]:
        raise InvalidInput(f"function table has {f.size} entries, expected {matrix.shape[1]}")
    return matrix @ f


def _power_iteration(matrix, tol, max_iter):
    x = np.ones(matrix.shape[0])
    x /= x.sum()
    for iteration in range(max_iter):
        y = matrix @ x
        lam = y.sum()
        y /= lam
        if np.max(np.abs(y - x)) < tol:
            logger.debug("power iteration converged after %d steps (lambda=%.17g)", iteration + 1, lam)
            return y, lam
        x = y
    raise ConvergenceFailure(
        f"power iteration did not reach residual {tol:g} within {max_iter} iterations"
    )


def spectral_data(A, nu, tol=config.POWER_ITERATION_TOL, max_iter=config.POWER_ITERATION_MAX_ITER):
    """
    Leading eigenvalue, eigenfunction and eigenprobability of L_{A,nu}.

    Raises:
        ConvergenceFailure: if power iteration does not converge, or the final
            eigen-residuals exceed the contractual tolerance.
    """
    matrix = transfer_matrix(A, nu)
    h, _ = _power_iteration(matrix, tol, max_iter)
    rho, _ = _power_iteration(matrix.T, tol, max_iter)
    rho = rho / rho.sum()
    lam = float(rho @ matrix @ h / (rho @ h))
    h = h / (h @ rho)

    scale = max(1.0, lam)
    right = np.max(np.abs(matrix @ h - lam * h)) / scale
    left = np.max(np.abs(rho @ matrix - lam * rho)) / scale
    if max(right, left) > config.CONTRACT_TOL:
        raise ConvergenceFailure(f"eigen-residuals {right:.3e} / {left:.3e} exceed {config.CONTRACT_TOL:g}")

    h.setflags(write=False)
    rho.setflags(write=False)
    return SpectralData(lam, h, rho)


def pressure(A, nu):
    """nu-pressure log(lambda_A)."""
    return spectral_data(A, nu).pressure


def normalize_potential(A, s):
    """
    Cohomologous normalized potential A + log h - log h o sigma - log lambda.

    h depends on the first k-1 symbols and h o sigma on symbols 2..k, so the
    result keeps depth k.
    """
    k = A.depth
    if k == 1:
        return Potential(A.table - np.log(s.lam))

    d = A.alphabet_size
    m = d ** (k - 1)
    words = np.arange(d ** k)
    log_h = np.log(s.h)
    values = A.flat + log_h[words // d] - log_h[words % m] - np.log(s.lam)
    return Potential(values.reshape(A.table.shape))


def is_normalized(A, nu, tol=config.CONTRACT_TOL):
    """True iff sum_a exp(A(a x)) nu_a = 1 for every context x, within tol."""
    sums = transfer_matrix(A, nu).sum(axis=1)
    return bool(np.max(np.abs(sums - 1.0)) <= tol)


def equilibrium_measure(A, nu, s=None):
    """
    Equilibrium measure of A with respect to nu.

    The normalized operator L_{Abar,nu} is row-stochastic on (k-1)-blocks; its
    transpose G[b][b'] = exp(Abar(a b')) nu_a is the nu-Jacobian of the
    equilibrium measure, whose stationary vector is the fixed point of G and whose
    forward transitions are p[b][b'] = G[b][b'] pi[b'] / pi[b].

    For k = 1 the result is the Bernoulli measure with weights exp(Abar) nu; for
    k > 2 it is a chain on (k-1)-blocks (``block_length`` = k-1).

    ``s`` is the spectral data of (A, nu) when the caller already has it.
    """
    if s is None:
        s = spectral_data(A, nu)
    normalized = normalize_potential(A, s)
    d, k = A.alphabet_size, A.depth

    if k == 1:
        weights = np.exp(normalized.table) * nu.weights
        weights /= weights.sum()
        return MarkovMeasure(np.tile(weights, (d, 1)), weights)

    prepend = transfer_matrix(normalized, nu)
    prepend /= prepend.sum(axis=1, keepdims=True)
    pi = stationary_distribution(prepend)
    forward = prepend.T * pi[None, :] / pi[:, None]
    forward /= forward.sum(axis=1, keepdims=True)
    return MarkovMeasure(forward, pi, block_length=k - 1, alphabet_size=d)


def integrate(A, mu):
    """Integral of A against mu: the k-cylinder masses of mu dotted with the table."""
    if A.alphabet_size != mu.alphabet_size:
        raise InvalidInput("potential and measure live on different alphabets")
    return float(np.dot(cylinder_masses(mu, A.depth), A.flat))


def relative_entropy(mu, nu):
    """
    Relative entropy h^nu(mu) = h_KS(mu) + sum_i P_mu(i) log nu_i.

    This is -integral of log J against mu, J the nu-Jacobian; with counting weights it
    is the Kolmogorov-Sinai entropy, with uniform probability weights h_KS - log d.
    """
    if mu.alphabet_size != nu.size:
        raise InvalidInput("measure and a priori weights live on different alphabets")
    return ks_entropy(mu) + float(np.dot(mu.symbol_marginal(), np.log(nu.weights)))


def jacobian_potential(mu, nu):
    """
    Recover the normalized potential log(mu(|i,j]) / (mu(|j]) nu_i)) of a positive chain.
    """
    if mu.block_length != 1:
        raise InvalidInput("Jacobian recovery is only implemented for ordinary chains")
    if np.any(mu.transition <= 0):
        raise InvalidInput("Jacobian recovery needs a chain with all transitions positive")
    pi = mu.stationary
    values = np.log(pi[:, None] * mu.transition / pi[None, :]) - np.log(nu.weights)[:, None]
    return Potential(values)
