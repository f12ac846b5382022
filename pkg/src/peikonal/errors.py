"""Exception hierarchy shared by all modules.

The CLI maps each family onto an exit status: parameter errors are usage
errors (1), data errors are problems with the inputs (2) and solver errors
are numerical failures (3).
"""


class PeikonalError(Exception):
    pass


class ParameterError(PeikonalError, ValueError):
    pass


class UnsupportedError(ParameterError):
    pass


class DataError(PeikonalError, ValueError):
    pass


class DegenerateScaleError(DataError):
    pass


class UnreachableError(DataError):
    pass


class SolverError(PeikonalError, RuntimeError):
    pass


class NoUpwindDataError(SolverError):
    pass


class InfeasibleError(SolverError):
    pass
