"""Exception taxonomy shared across the package.

Input problems (files, configs) raise ParseError/ValidationError/ConfigError;
model assembly bugs raise ModelBuildError; solver-side trouble raises
SolverError or one of its typed subclasses so callers can distinguish an
infeasible market from a numerical failure.
"""


class GridbidError(Exception):
    """Base class for every error raised by this package."""


class ParseError(GridbidError):
    """An input file could not be read or has malformed records."""


class ValidationError(GridbidError):
    """Inputs parsed fine but violate a documented invariant."""


class ConfigError(GridbidError):
    """A study or run configuration is unusable."""


class ModelBuildError(GridbidError):
    """A model was assembled inconsistently (unknown variable, duplicate row)."""


class SolverError(GridbidError):
    """The LP solver failed or returned a solution that fails quality checks."""


class InfeasibleError(SolverError):
    """A market model that must clear has no feasible point."""


class UnboundedError(SolverError):
    """A market model is unbounded below, which indicates bad input data."""


class OracleSizeError(GridbidError):
    """The brute-force bid grid would exceed the enumeration cap."""
