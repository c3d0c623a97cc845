class BagDensError(Exception):
    pass


class InvalidParameterError(BagDensError, ValueError):
    """A parameter is outside its valid domain (bandwidth <= 0, empty grid, ...)."""


class RejectedInputError(BagDensError, ValueError):
    """Input observations are unusable (non-finite values, too few points)."""


class DegenerateSampleError(BagDensError, ValueError):
    """The sample has zero spread, so scale-based rules are undefined."""


class ConfigError(BagDensError):
    pass
