"""Exception types raised by the rhilc library."""


class RhilcError(Exception):
    """Base class for all rhilc-specific errors."""


class ConfigError(RhilcError):
    """Invalid or inconsistent experiment configuration.

    `field` names the offending entry when known.
    """

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class SynthesisError(RhilcError):
    """Learning-filter synthesis failed (ill-conditioned normal matrix)."""

    def __init__(self, message, rcond=None):
        self.rcond = rcond
        super().__init__(message)


class FixedPointError(RhilcError):
    """No usable iteration-domain fixed point (unstable or singular map)."""

    def __init__(self, message, radius=None, rcond=None):
        self.radius = radius
        self.rcond = rcond
        super().__init__(message)


class KktSolveError(RhilcError):
    """Equality-constrained QP solve failed (singular KKT system)."""

    def __init__(self, message, rcond=None):
        self.rcond = rcond
        super().__init__(message)


class DivergenceError(RhilcError):
    """Closed-loop run produced nonfinite values.

    `iteration` is the index at which divergence was detected; `record`
    carries the partial run history up to that point when available.
    """

    def __init__(self, message, iteration, record=None):
        self.iteration = iteration
        self.record = record
        super().__init__(message)
