"""Exception hierarchy for phaselock.

Every error raised on purpose by the library derives from PhaselockError so
callers (and the CLI) can distinguish validation problems from numerical
failures: ValidationError subclasses indicate bad inputs/configuration,
NumericalError subclasses indicate a computation that could not finish.
"""


class PhaselockError(Exception):
    """Base class for all phaselock errors."""


class ValidationError(PhaselockError):
    """Bad input: rejected before any computation runs."""


class NumericalError(PhaselockError):
    """A computation started but could not be completed."""


# --- graphs ---------------------------------------------------------------

class SelfLoopError(ValidationError):
    """An edge joins a vertex to itself."""


class DuplicateEdgeError(ValidationError):
    """The same undirected edge appears twice."""


class IndexOutOfRangeError(ValidationError):
    """An edge endpoint is outside 0..n-1."""


class TooLargeError(ValidationError):
    """Exhaustive partition enumeration requested for n > 25 vertices."""


class EmptySideError(ValidationError):
    """A bipartition has an empty side."""


class DisconnectedError(ValidationError):
    """The operation requires a connected graph."""


# --- couplings ------------------------------------------------------------

class BadShapeError(ValidationError):
    """A coupling-family parameter is outside its admissible range."""


# --- dynamics -------------------------------------------------------------

class NonFiniteError(NumericalError):
    """Integration produced a NaN or infinity."""


class EventOverflowError(NumericalError):
    """The event-driven simulation exceeded its event budget."""


class NotPotentialFormError(ValidationError):
    """Potential/gradient operations need zero lags and odd couplings."""


# --- equilibria -----------------------------------------------------------

class BadSpecError(ValidationError):
    """A symmetric-state specification is inconsistent."""


class EmptySetError(ValidationError):
    """An operation over a set of phases received an empty set."""


class BadNError(ValidationError):
    """The population size does not fit the requested cluster layout."""


# --- stability ------------------------------------------------------------

class NotSymmetricError(ValidationError):
    """The eigensolver requires a symmetric matrix."""


class LaggedModelError(ValidationError):
    """Spectral classification is only defined for zero-lag models."""


class PreconditionFailedError(ValidationError):
    """A certificate's structural hypotheses do not hold."""


# --- cli ------------------------------------------------------------------

class ConfigError(ValidationError):
    """A run configuration failed validation."""
