"""Exception types raised across the package."""


class BorderforgeError(Exception):
    """Base class for all package-specific errors."""


class OutOfBounds(BorderforgeError):
    """A world point or cell coordinate falls outside the grid."""


class MalformedFile(BorderforgeError):
    """A map file (PGM payload or .meta sidecar) cannot be parsed."""


class InvalidDepth(BorderforgeError):
    """Back-projection was asked for a non-positive or non-finite depth."""


class BehindCamera(BorderforgeError):
    """Forward projection of a point with Z <= 0."""


class DegenerateChain(BorderforgeError):
    """Fewer than two distinct points remain after chain extraction."""


class ExtensionFailed(BorderforgeError):
    """An open chain's end segment has no direction to extend along."""


class InvalidSeed(BorderforgeError):
    """The flood-fill seed cell is occupied, unknown, or on the border."""


class PartitionFailed(BorderforgeError):
    """The border did not split the free space (complement came out empty)."""


class InsufficientHistory(BorderforgeError):
    """Fewer than two poses were recorded before finalization."""


class NoKeepOffPoint(BorderforgeError):
    """No laser position was ever observed, so the keep-off side is unknown."""


class FinalizeFailed(BorderforgeError):
    """Border integration failed; the session stays in KeepOff for a retry."""


class NoPath(BorderforgeError):
    """The planner found no free 4-connected path from start to goal."""


class UndefinedIndex(BorderforgeError):
    """Jaccard of two empty sets."""


class DegenerateFit(BorderforgeError):
    """Least squares over reports whose border lengths are all equal."""


class ScenarioInvalid(BorderforgeError):
    """A scenario file is missing fields or references missing files."""


class UnknownMap(BorderforgeError):
    """Session creation referenced a map id the service does not serve."""


class MalformedMessage(BorderforgeError):
    """A client protocol message could not be interpreted."""


class SessionClosed(BorderforgeError):
    """A message arrived for a session that no longer exists."""
