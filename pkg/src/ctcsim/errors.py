"""Exception types shared across the simulator."""


class CtcSimError(Exception):
    """Base class for all simulator errors."""


class LabelError(CtcSimError):
    """A channel label is unknown or malformed."""


class LabelCollision(LabelError):
    """Two channels (or tensor factors) carry the same label."""


class ArityError(CtcSimError):
    """Gate arity does not match the number of target channels."""


class ConfigError(CtcSimError):
    """Circuit or model configuration is invalid."""


class NoCtcError(CtcSimError):
    """The requested channel model needs at least one looped channel."""


class UnsupportedError(CtcSimError):
    """The operation is outside the supported regime (size, channel count, ...)."""


class NumericsError(CtcSimError):
    """A numerical routine failed to converge to the requested accuracy."""


class ParseError(CtcSimError):
    """A circuit document could not be parsed."""


class ScenarioNotFound(CtcSimError):
    """No catalog scenario with the requested name."""


class InfiniteSkew(CtcSimError):
    """The post-selection skew factor diverges (zero noise)."""


class ParadoxError(CtcSimError):
    """Post-selection annihilates the wavefunction: the loop has no consistent history.

    Carries the full projection table (when available) so a caller can inspect
    where the amplitude went.
    """

    def __init__(self, message, projections=None):
        super().__init__(message)
        self.projections = projections
