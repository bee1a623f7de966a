"""Exception hierarchy shared by every module of the engine."""


class FinhallError(Exception):
    """Base class for all engine errors."""


class ConfigError(FinhallError):
    """Invalid model configuration; carries one diagnostic per violated invariant."""

    def __init__(self, diagnostics):
        if isinstance(diagnostics, str):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


class BoxMismatchError(ConfigError):
    """Operands of a binary operation live in different truncation boxes."""


class ResourceGuardError(FinhallError):
    """An exhaustive enumeration would exceed its guard threshold."""

    def __init__(self, what, attempted, limit):
        self.what = what
        self.attempted = attempted
        self.limit = limit
        super().__init__(f"{what} too large: attempted {attempted} (limit {limit})")


class NotInvertibleError(FinhallError):
    """Inversion requested for an element with zero constant term."""


class DomainError(FinhallError):
    """exp/log (or a slope) called outside its domain."""


class InternalConsistencyError(FinhallError):
    """Two independent computations of the same quantity disagree."""


class ModelViolation(InternalConsistencyError):
    """A property the theory guarantees failed (e.g. non-unique HN destabilizer)."""


class TorsionPairViolation(FinhallError):
    """An object admits zero or several torsion splittings."""


class MissingGradeError(FinhallError):
    """A Hall element or catalog lookup touched a grade outside the catalog."""
