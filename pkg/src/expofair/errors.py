"""Exception types shared across the library.

The CLI maps these onto exit codes: validation failures exit with 1,
infeasibility and convergence failures with 2.
"""


class ExpofairError(Exception):
    """Base class for all errors raised by this library."""


class ValidationError(ExpofairError, ValueError):
    """Inputs violate a contract: bad domains, shapes, or malformed files."""


class DimensionMismatchError(ValidationError):
    """Vector or permutation lengths disagree."""


class InfeasibleError(ExpofairError):
    """A point or target lies outside the feasible exposure polytope."""


class ConvergenceError(ExpofairError):
    """An iterative routine exhausted its budget without converging."""


class TrivialInstanceError(ExpofairError):
    """The fairness target coincides with the by-relevance exposure, so the
    normalized unfairness metric has a zero denominator and the instance is
    solved by always delivering the by-relevance ranking."""
