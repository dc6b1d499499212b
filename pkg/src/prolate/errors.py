"""Exception types shared across the package."""


class NumericError(RuntimeError):
    """A numerical routine produced values outside its validated range."""


class CapacityError(RuntimeError):
    """A computed spectrum or table is too short for the requested operation."""


class SamplingError(RuntimeError):
    """A rejection sampler failed; carries the best concentration achieved."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved
