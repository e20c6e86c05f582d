"""
********************************************************************************
* Name: __init__.py
* Created On: March 2, 2026
********************************************************************************
"""


class MismeasureException(Exception):
    pass


class InvalidSpecError(MismeasureException, ValueError):
    pass


class DataError(MismeasureException, ValueError):
    pass


class OutOfRegionError(DataError):
    pass


class NoEffectivePairsError(DataError):
    pass


class ThinConditioningError(DataError):
    """
    Raised when the (y, x) marginal density is below the conditioning floor.

    Args:
        message(str): Error message.
        indices(list<int>): Observation indices whose conditioning point is too thin.
    """
    def __init__(self, message, indices=None):
        super().__init__(message)
        self.indices = list(indices) if indices is not None else []


class ConvergenceError(MismeasureException):
    """
    Raised when a fit does not converge and the caller cannot proceed without it.

    Args:
        message(str): Error message.
        result(object): The partial (non-converged) result, if any.
    """
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class BootstrapAbortedError(MismeasureException):
    pass


class SuiteFailedError(MismeasureException):
    pass


__all__ = ['MismeasureException', 'InvalidSpecError', 'DataError', 'OutOfRegionError', 'NoEffectivePairsError',
           'ThinConditioningError', 'ConvergenceError', 'BootstrapAbortedError', 'SuiteFailedError']
