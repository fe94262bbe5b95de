"""Numerical settings shared by every module.

Everything is explicit: callers override these through keyword arguments and
jobs override them through their ``options`` object. Nothing is read from the
environment.
"""

# Row sums of stochastic matrices, probability vectors, kernels
PROBABILITY_TOL = 1e-12

# Stationarity of a supplied stationary vector
STATIONARY_TOL = 1e-10

# Eigenvalue-1 multiplicity test for reducibility
EIGENVALUE_ONE_TOL = 1e-8

# Contractual tolerance for eigen-residuals and normalization checks
CONTRACT_TOL = 1e-10

# Internal power-iteration target
POWER_ITERATION_TOL = 1e-12
POWER_ITERATION_MAX_ITER = 100_000

# Stationary vectors: direct eigenproblem up to this many states, power iteration beyond
DIRECT_SOLVE_MAX_STATES = 64
STATIONARY_POWER_TOL = 1e-13

# Exhaustive cylinder enumeration bound (d ** n)
MAX_ENUMERATION = 10_000_000

# Quadrature rules built by name need at least this many nodes
MIN_QUADRATURE_NODES = 8
QUADRATURE_WEIGHT_TOL = 1e-14

SCHEMA_VERSION = 1
