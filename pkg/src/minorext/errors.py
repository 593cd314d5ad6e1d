"""Exception types shared across the package."""


class MinorExtError(Exception):
    """Base class for all package errors."""


class ParameterError(MinorExtError, ValueError):
    """An argument is outside its admissible range."""


class ConfigError(ParameterError):
    """An experiment configuration is malformed or inadmissible."""


class ParseError(MinorExtError, ValueError):
    """An input file could not be parsed."""


class SizeError(MinorExtError, ValueError):
    """Requested dimensions exceed what can be addressed."""


class CombinatorialExplosionError(MinorExtError):
    """C(p, m) does not fit in a signed 64-bit integer."""

    def __init__(self, p, m, count):
        self.p, self.m, self.count = p, m, count
        super().__init__(f"C({p}, {m}) = {count} subsets does not fit in 64 bits")


class BudgetError(MinorExtError):
    """A scan would visit more subsets than the caller allowed."""

    def __init__(self, count, budget):
        self.count, self.budget = count, budget
        super().__init__(f"scan needs {count} subsets, budget is {budget}")


class NonConvergenceError(MinorExtError, ArithmeticError):
    """Jacobi iteration hit its sweep cap; carries the best iterate."""

    def __init__(self, message, best_iterate=None):
        super().__init__(message)
        self.best_iterate = best_iterate


class ConstructionError(MinorExtError):
    """A constructed object failed its own verification (e.g. net coverage)."""


class DegenerateEstimateError(MinorExtError):
    """A Monte Carlo estimate is undefined, e.g. zero tail hits."""
