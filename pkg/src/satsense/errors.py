"""Exception hierarchy."""


class SensingError(Exception):
    """Base class for all errors raised by this package."""


class NonFiniteField(SensingError, ValueError):
    pass


class NegativeMagnitude(SensingError, ValueError):
    pass


class NegativePhotonNumber(SensingError, ValueError):
    pass


class NonPositiveVariance(SensingError, ValueError):
    pass


class InvalidMedium(SensingError, ValueError):
    pass


class IntegrationDidNotConverge(SensingError, ArithmeticError):
    pass


class NoConvergence(SensingError, ArithmeticError):
    pass


class BoundaryOptimum(SensingError):
    """The best point found sits on an upper search bound.

    The offending result is kept on ``result`` (an ``OptimizationResult`` or
    ``AdvantageResult``) so callers can still report it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class InsufficientColumn(SensingError, ValueError):
    pass


class BracketExcludesOptimum(SensingError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
