"""Exception hierarchy shared by all modules."""


class IndicatrixError(Exception):
    """Base class for every error raised by this package."""


class SchemaError(IndicatrixError, ValueError):
    """An input file or payload does not follow the expected layout."""


class EmptySpace(IndicatrixError, ValueError):
    pass


class MetricViolation(IndicatrixError, ValueError):
    pass


class NegativeWeight(IndicatrixError, ValueError):
    pass


class UnknownPoint(IndicatrixError, KeyError):
    pass


class InvalidParams(IndicatrixError, ValueError):
    pass


class UnknownCube(IndicatrixError, KeyError):
    pass


class UnknownGeneration(IndicatrixError, KeyError):
    pass


class MonotonicityViolation(IndicatrixError, AssertionError):
    """N_k(y) decreased between consecutive generations; indicates a broken cube system."""


class InvalidSchedule(IndicatrixError, ValueError):
    pass


class DegenerateInterval(IndicatrixError, ValueError):
    pass


class IndexOutOfRange(IndicatrixError, IndexError):
    pass
