"""Exception types shared across the package."""


class CircumnavError(Exception):
    pass


class InvalidInputError(CircumnavError, ValueError):
    """A numeric argument is non-finite or outside its admissible range."""


class InvalidConfigError(CircumnavError, ValueError):
    """A parameter set is structurally unusable (e.g. v <= 0, missing limit)."""


class AtTargetError(CircumnavError):
    """Range fell inside the singularity guard band; polar angles are undefined."""


class InfeasibleError(CircumnavError, ValueError):
    """A gain or envelope inequality required by a design rule does not hold."""

    def __init__(self, message, violated=()):
        super().__init__(message)
        self.violated = tuple(violated)


class DivergedError(CircumnavError, RuntimeError):
    """The integrated state became non-finite."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class ConfigError(CircumnavError, ValueError):
    """Scenario file could not be parsed or is missing required fields."""


class ValidationError(CircumnavError, ValueError):
    """Scenario parameters violate analysis checks and warnings were not accepted."""

    def __init__(self, message, violated=()):
        super().__init__(message)
        self.violated = tuple(violated)
