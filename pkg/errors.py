#!/usr/bin/env python3
"""
Custom errors for rowsolve
"""


class RowSolveError(Exception):
    """Exception to report generic errors"""

    def __init__(self, message):
        super().__init__(message)


class ParameterError(RowSolveError):
    """Invalid parameters or usage (CLI exit code 2)"""


class DimensionError(ParameterError):
    """Operands whose shapes violate an operation's contract"""


class EnumerationGuardError(ParameterError):
    """Subset enumeration would exceed the desk-scale guard"""


class ProblemIOError(RowSolveError):
    """Missing or corrupt problem bundle file"""

    def __init__(self, message, filename=None):
        super().__init__(message)
        self.filename = filename


class NumericError(RowSolveError):
    """Numeric failure, optionally tagged with the iteration it occurred at"""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class NotPositiveDefinite(NumericError):
    """Cholesky factorisation met a non-positive pivot"""


class TheoremViolation(RowSolveError):
    """A bound that must always hold failed (implementation bug)"""

    def __init__(self, message, failures=None):
        super().__init__(message)
        self.failures = failures or []
