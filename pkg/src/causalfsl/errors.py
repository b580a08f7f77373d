"""Exception types shared across the engine."""


class CausalFSLError(Exception):
    """Base class for all engine errors."""


class ZeroRowError(CausalFSLError):
    """A row to be normalized has (numerically) zero norm."""


class ShapeMismatchError(CausalFSLError):
    """Operand shapes are inconsistent."""


class IndexOutOfRangeError(CausalFSLError):
    """A class/label index falls outside the valid range."""


class BadMagicError(CausalFSLError):
    """Embedding file does not start with the expected magic bytes."""


class UnsupportedVersionError(CausalFSLError):
    """Embedding file declares a format version this reader cannot handle."""


class TruncatedPayloadError(CausalFSLError):
    """Embedding file payload is shorter than the header promises."""


class SizeOverflowError(CausalFSLError):
    """Embedding file header claims a payload above the configured cap."""


class UnknownItemError(CausalFSLError):
    """An item id is not present in the manifest."""


class InsufficientClassesError(CausalFSLError):
    """Manifest has fewer classes than the episode requests."""


class InsufficientItemsError(CausalFSLError):
    """A class has fewer items than the episode requests."""


class ClassListMismatchError(CausalFSLError):
    """Two manifests disagree on the ordered class-name list."""


class EmptySupportError(CausalFSLError):
    """A predictor was given an empty support set."""


class EmptyClassError(CausalFSLError):
    """A class has no support examples."""


class EmptyQuerySetError(CausalFSLError):
    """Evaluation requested on an episode with no queries."""


class InvalidTablesError(CausalFSLError):
    """SCM probability tables are malformed (shape, sign, or row sums)."""


class PositivityViolationError(CausalFSLError):
    """A joint cell P(x, z) is zero, so a front-door conditional is undefined."""
