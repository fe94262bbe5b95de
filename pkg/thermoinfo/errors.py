"""Exception hierarchy and the divergence sentinel."""

import math


class ThermoInfoError(Exception):
    """Base class for every error raised by thermoinfo."""


class InvalidInput(ThermoInfoError, ValueError):
    """An input violates a type invariant (shape, sign, normalization)."""


class ReducibleChain(ThermoInfoError):
    """The stochastic matrix does not have a unique, strictly positive stationary vector."""


class ConvergenceFailure(ThermoInfoError):
    """An iterative solver hit its iteration cap above the residual tolerance."""


class NotNormalized(ThermoInfoError):
    """A function that must be normalized against an a priori measure is not."""


class EnumerationTooLarge(ThermoInfoError):
    """Exhaustive cylinder enumeration would exceed the configured bound."""


class SchemaError(ThermoInfoError):
    """A job document is malformed or internally inconsistent."""


DIVERGENT = math.inf


def is_divergent(value):
    """True for the +inf sentinel returned on absolute-continuity failures."""
    return value == DIVERGENT
