"""Exception types shared across the package."""


class CellanyonError(Exception):
    """Base class for all package errors."""


class StructuralError(CellanyonError):
    """Objects from incompatible groups, complexes or dimensions were mixed."""


class ArgumentError(CellanyonError):
    """A parameter is outside its documented range."""


class InfiniteBoundaryError(CellanyonError):
    """A tail fails its cycle certificate, so the boundary has infinite support."""

    def __init__(self, end_name, side="boundary"):
        self.end_name = end_name
        super().__init__(f"infinite {side}: tail on end {end_name!r} is not closed")


class UndefinedPairingError(CellanyonError):
    """Both pairing arguments have infinite support."""


class CapExceededError(CellanyonError):
    """A dense-model request exceeds the configured state-space cap."""


class StabilizationError(CellanyonError):
    """Truncation depths m and m+1 disagree; names the unstable ends."""

    def __init__(self, message, ends=()):
        self.ends = tuple(ends)
        super().__init__(message)


class NotFinitelyGeneratedError(CellanyonError):
    """A group required to be finite could not be presented finitely."""


class WitnessUnrepresentableError(CellanyonError):
    """The class is zero but no bounding chain exists in verbatim-tail form."""


class LogicalValueError(CellanyonError):
    """The requested expectation value depends on the unspecified logical state."""
