"""Error types raised by the core modules."""


class BipolaronError(Exception):
    """Base class for every error raised by the toolkit."""


class GridError(BipolaronError, ValueError):
    pass


class GridMismatchError(BipolaronError, ValueError):
    pass


class NormalizationError(BipolaronError, ValueError):
    def __init__(self, deviation, message=None):
        self.deviation = deviation
        super().__init__(message or f"Input is not normalized: |norm - 1| = {deviation:.3e}")


class DomainError(BipolaronError, ValueError):
    pass


class ConfigError(BipolaronError, ValueError):
    pass


class SymmetryError(BipolaronError, ValueError):
    pass


class ExtrapolationError(BipolaronError, ValueError):
    pass


class ConditioningError(BipolaronError, ValueError):
    def __init__(self, message, pair=None):
        self.pair = pair
        super().__init__(message)


class ConvergenceError(BipolaronError, RuntimeError):
    def __init__(self, message, last_iterate=None, trace=None, level=None):
        self.last_iterate = last_iterate
        self.trace = trace if trace is not None else []
        self.level = level
        super().__init__(message)


class ConsistencyError(BipolaronError, RuntimeError):
    pass


class OptimizerError(BipolaronError, RuntimeError):
    def __init__(self, message, best_value=None):
        self.best_value = best_value
        super().__init__(message)


class ToleranceError(BipolaronError, RuntimeError):
    pass


class SizeError(BipolaronError, RuntimeError):
    def __init__(self, message, dimension=None):
        self.dimension = dimension
        super().__init__(message)


class IterationError(BipolaronError, RuntimeError):
    def __init__(self, message, ritz_value=None, residual=None):
        self.ritz_value = ritz_value
        self.residual = residual
        super().__init__(message)
