"""Exception hierarchy shared by all modules."""


class StochfluidError(Exception):
    """Base class for every error raised by the package."""


class InvalidConfigurationError(StochfluidError, ValueError):
    """A precondition on a grid, width, or config value is violated."""


class GridMismatchError(InvalidConfigurationError):
    pass


class ModelInconsistencyError(StochfluidError, ValueError):
    """The physical model leaves its domain of validity (e.g. attractive gas)."""


class SingularModeError(StochfluidError, ValueError):
    pass


class DivergentOccupationError(StochfluidError, ValueError):
    pass


class NoSoundSpeedError(StochfluidError, ValueError):
    """E(k)/|k| has no finite nonzero limit at k -> 0."""


class NumericalFailure(StochfluidError, RuntimeError):
    """Base class for failures detected while integrating in time."""

    def __init__(self, message, last_good=None):
        super().__init__(message)
        self.last_good = last_good


class DivergenceError(NumericalFailure):
    pass


class StepSizeError(NumericalFailure):
    pass
