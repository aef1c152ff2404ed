"""Exception taxonomy shared by all nonarch modules."""


class NonarchError(Exception):
    """Base class for errors raised by the library."""


class SchemaError(NonarchError):
    """Malformed or unparseable input data (JSON schema violations)."""


class LevelError(NonarchError):
    """An exponent denominator exceeds the supported p-power level."""


class DigitRangeError(NonarchError, ValueError):
    """A digit lies outside {0, ..., p-1}."""


class ParamsMismatchError(NonarchError):
    """Operands built over different parameter sets."""


class DivisionError(NonarchError):
    """Inversion of an element that is zero up to precision."""


class ConvergenceError(NonarchError):
    """A substitution argument escapes the unit ball without an override."""


class CapError(NonarchError):
    """A result would exceed the configured degree cap."""


class SingularityError(NonarchError):
    """The linearization at the chosen center is not invertible."""


class IntegrityError(NonarchError):
    """Structural invariants of the input data are violated."""


class ConstraintError(NonarchError):
    """Face constraints are mutually incompatible."""


class PrecisionError(NonarchError):
    """The precision cap is too small to witness the requested identity."""


class ApproximationError(NonarchError):
    """No admissible truncation level meets the convergence threshold."""
