"""Exception types shared across the package."""


class DomainError(ValueError):
    """A trajectory or fault point was queried where it is not defined."""


class UnsupportedError(ValueError):
    """The requested analysis does not apply to this kind of input."""


class ScenarioError(ValueError):
    """A scenario or plan document failed validation."""


class PackingError(RuntimeError):
    """Random placement could not fit the requested orbits into the area."""


class InfeasibleError(RuntimeError):
    """No transmission range up to the maximum satisfies the requirement.

    ``witness`` describes the violation observed at the maximum range.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
