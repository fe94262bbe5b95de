"""
Shift-space substrate: alphabets, words, Markov measures, time reversal and orbit sampling.

Symbols are 0..d-1. A word w = (w_1, ..., w_n) denotes the cylinder of sequences
starting with w. Markov measures are given by a row-stochastic matrix p and its
stationary vector pi, with cylinder masses pi[w_1] * p[w_1, w_2] * ... * p[w_{n-1}, w_n].
"""

import bisect
import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as la
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.special import entr

from thermoinfo import config
from thermoinfo.errors import ConvergenceFailure, EnumerationTooLarge, InvalidInput, ReducibleChain

logger = logging.getLogger(__name__)

Word = Sequence[int]


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Alphabet:
    """The symbols {0, ..., size-1}."""

    size: int

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 2:
            raise InvalidInput(f"alphabet size must be an integer >= 2, got {self.size}")

    def words(self, n):
        """All words of length n in lexicographic order, as an (size**n, n) int array."""
        if n < 1:
            raise InvalidInput("word length must be >= 1")
        grids = np.indices((self.size,) * n).reshape(n, -1)
        return grids.T.copy()


def as_word(symbols, d):
    """Validate a word over an alphabet of size d and return it as a tuple."""
    word = tuple(int(s) for s in symbols)
    if not word:
        raise InvalidInput("words must be nonempty")
    if any(s < 0 or s >= d for s in word):
        raise InvalidInput(f"word {word} has symbols outside 0..{d - 1}")
    return word


def as_stochastic_matrix(m, tol=config.PROBABILITY_TOL):
    """Validate a square row-stochastic matrix and return a read-only float array."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInput(f"stochastic matrix must be square, got shape {m.shape}")
    Alphabet(m.shape[0])
    if not np.all(np.isfinite(m)) or np.any(m < 0):
        raise InvalidInput("stochastic matrix entries must be finite and >= 0")
    row_sums = m.sum(axis=1)
    worst = np.max(np.abs(row_sums - 1.0))
    if worst > tol:
        raise InvalidInput(f"stochastic matrix rows must sum to 1 (worst deviation {worst:.3e})")
    return _frozen(m)


def _is_irreducible(m):
    n_components, _ = connected_components(csr_matrix(m > 0), directed=True, connection="strong")
    return n_components == 1


def stationary_distribution(m):
    """
    Stationary probability vector of an irreducible row-stochastic matrix.

    Uses the direct eigenproblem for small chains and power iteration on the lazy
    chain (I + m) / 2 beyond, which has the same stationary vector and no period.

    Raises:
        ReducibleChain: if the stationary vector is not unique or not strictly positive.
        ConvergenceFailure: if the power route stalls above its residual tolerance.
    """
    m = as_stochastic_matrix(m)
    d = m.shape[0]

    if d <= config.DIRECT_SOLVE_MAX_STATES:
        vals, vecs = la.eig(m.T)
        unit = np.abs(vals - 1.0) < config.EIGENVALUE_ONE_TOL
        if np.count_nonzero(unit) != 1:
            raise ReducibleChain(
                f"eigenvalue 1 has multiplicity {np.count_nonzero(unit)}; stationary vector is not unique"
            )
        pi = np.real(vecs[:, np.flatnonzero(unit)[0]])
        pi = pi / pi.sum()
    else:
        if not _is_irreducible(m):
            raise ReducibleChain("transition graph is not strongly connected")
        lazy = 0.5 * (np.eye(d) + m)
        pi = np.full(d, 1.0 / d)
        for iteration in range(config.POWER_ITERATION_MAX_ITER):
            pi = pi @ lazy
            pi /= pi.sum()
            if np.max(np.abs(pi @ m - pi)) < config.STATIONARY_POWER_TOL:
                logger.debug("stationary power iteration converged after %d steps", iteration + 1)
                break
        else:
            raise ConvergenceFailure(
                f"stationary power iteration did not reach {config.STATIONARY_POWER_TOL:g} "
                f"in {config.POWER_ITERATION_MAX_ITER} steps (chain mixes too slowly)"
            )

    if np.any(pi <= 0):
        raise ReducibleChain("stationary vector has non-positive entries (transient states)")
    return _frozen(pi)


@dataclass(frozen=True)
class MarkovMeasure:
    """
    Shift-invariant Markov measure.

    ``block_length`` is 1 for ordinary chains. Equilibria of depth-k potentials with
    k > 2 are chains on the alphabet of (k-1)-blocks, indexed lexicographically
    with the first symbol most significant; ``alphabet_size`` is then the size of
    the underlying symbol alphabet.
    """

    transition: np.ndarray
    stationary: np.ndarray
    block_length: int = 1
    alphabet_size: int = field(default=0)

    def __post_init__(self):
        p = as_stochastic_matrix(self.transition)
        pi = np.asarray(self.stationary, dtype=float)
        if pi.shape != (p.shape[0],):
            raise InvalidInput("stationary vector length does not match the transition matrix")
        if np.any(pi <= 0):
            raise ReducibleChain("stationary vector must be strictly positive")
        if abs(pi.sum() - 1.0) > config.PROBABILITY_TOL * p.shape[0]:
            raise InvalidInput("stationary vector must sum to 1")
        if np.max(np.abs(pi @ p - pi)) > config.STATIONARY_TOL:
            raise InvalidInput("stationary vector is not invariant under the transition matrix")
        if not _is_irreducible(p):
            raise ReducibleChain("transition graph is not strongly connected")

        d = self.alphabet_size or p.shape[0]
        if d ** self.block_length != p.shape[0]:
            raise InvalidInput(
                f"{p.shape[0]} states is not an alphabet of {d} symbols in blocks of {self.block_length}"
            )
        object.__setattr__(self, "transition", p)
        object.__setattr__(self, "stationary", _frozen(pi))
        object.__setattr__(self, "alphabet_size", d)

    @classmethod
    def from_transition(cls, m, block_length=1, alphabet_size=0):
        """Build the measure of an irreducible chain, computing its stationary vector."""
        m = as_stochastic_matrix(m)
        return cls(m, stationary_distribution(m), block_length, alphabet_size)

    @property
    def n_states(self):
        return self.transition.shape[0]

    @property
    def alphabet(self):
        return Alphabet(self.alphabet_size)

    def symbol_marginal(self):
        """Law of the first symbol x_1 (equals ``stationary`` for ordinary chains)."""
        if self.block_length == 1:
            return self.stationary
        per_symbol = self.n_states // self.alphabet_size
        return self.stationary.reshape(self.alphabet_size, per_symbol).sum(axis=1)


def _block_index(symbols, d):
    index = 0
    for s in symbols:
        index = index * d + s
    return index


def cylinder_mass(mu, w):
    """Measure of the cylinder fixed by the word w (a word over the symbol alphabet)."""
    d, b = mu.alphabet_size, mu.block_length
    word = as_word(w, d)
    if len(word) < b:
        # sum over every block that starts with w
        per_prefix = d ** (b - len(word))
        start = _block_index(word, d) * per_prefix
        return float(mu.stationary[start:start + per_prefix].sum())

    state = _block_index(word[:b], d)
    mass = mu.stationary[state]
    for t in range(1, len(word) - b + 1):
        nxt = _block_index(word[t:t + b], d)
        mass *= mu.transition[state, nxt]
        state = nxt
    return float(mass)


def cylinder_masses(mu, n, limit=config.MAX_ENUMERATION):
    """
    Masses of all n-cylinders in lexicographic word order.

    Raises:
        EnumerationTooLarge: if d**n exceeds ``limit``.
    """
    d, b = mu.alphabet_size, mu.block_length
    if n < 1:
        raise InvalidInput("cylinder length must be >= 1")
    if d ** n > limit:
        raise EnumerationTooLarge(f"{d}**{n} cylinders exceeds the enumeration bound {limit}")
    if n <= b:
        return mu.stationary.reshape(d ** n, -1).sum(axis=1)

    masses = np.array(mu.stationary)
    symbols = np.arange(d)
    for _ in range(n - b):
        state = np.arange(masses.size) % d ** b
        nxt = (state % d ** (b - 1))[:, None] * d + symbols[None, :]
        masses = (masses[:, None] * mu.transition[state[:, None], nxt]).reshape(-1)
    return masses


def two_cylinder_marginal(mu):
    """mu(|i, j]) = pi_i p_ij as a d x d table."""
    return mu.stationary[:, None] * mu.transition


def reverse_measure(mu):
    """
    Time reversal pushed back to the one-sided shift.

    The reversed chain has q_ij = pi_j p_ji / pi_i and the same stationary vector,
    so every cylinder gets the mass of the reversed word under mu.
    """
    if mu.block_length != 1:
        raise InvalidInput("time reversal is only defined here for ordinary (block length 1) chains")
    pi = mu.stationary
    q = mu.transition.T * pi[None, :] / pi[:, None]
    # re-normalize rows to absorb rounding in pi
    q = q / q.sum(axis=1, keepdims=True)
    return MarkovMeasure(q, pi)


def _cumulative_rows(mu):
    cum = np.cumsum(mu.transition, axis=1)
    cum[:, -1] = 1.0
    start = np.cumsum(mu.stationary)
    start[-1] = 1.0
    return start, cum


def sample_orbit(mu, n, seed):
    """
    Sample a length-n word with the law of the n-cylinder marginal of mu.

    Args:
        mu: Markov measure to sample from.
        n: orbit length (>= 1).
        seed: integer or ``numpy.random.SeedSequence``; the same seed gives the same word.

    Returns:
        numpy int array of n symbols.
    """
    if n < 1:
        raise InvalidInput("orbit length must be >= 1")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    start, cum = _cumulative_rows(mu)
    rows = [list(row) for row in cum]
    last = mu.n_states - 1

    orbit = np.empty(n, dtype=np.int64)
    state = min(bisect.bisect_right(list(start), u[0]), last)
    orbit[0] = state
    for t in range(1, n):
        state = min(bisect.bisect_right(rows[state], u[t]), last)
        orbit[t] = state
    return orbit


def sample_orbits(mu, n, count, seed):
    """Sample ``count`` independent length-n words at once; returns a (count, n) int array."""
    if n < 1 or count < 1:
        raise InvalidInput("orbit length and count must be >= 1")
    rng = np.random.default_rng(seed)
    start, cum = _cumulative_rows(mu)
    last = mu.n_states - 1

    orbits = np.empty((count, n), dtype=np.int64)
    orbits[:, 0] = np.minimum(np.searchsorted(start, rng.random(count), side="right"), last)
    for t in range(1, n):
        u = rng.random(count)
        orbits[:, t] = np.minimum((u[:, None] >= cum[orbits[:, t - 1]]).sum(axis=1), last)
    return orbits


def ks_entropy(mu):
    """Kolmogorov-Sinai entropy -sum_ij pi_i p_ij log p_ij in nats (0 log 0 = 0)."""
    return float(np.dot(mu.stationary, entr(mu.transition).sum(axis=1)))


def block_entropy(mu, n):
    """
    Shannon entropy of the n-cylinder partition, by exhaustive enumeration.

    For Markov measures this equals S(pi) + (n - 1) * ks_entropy(mu).
    """
    return float(entr(cylinder_masses(mu, n)).sum())
