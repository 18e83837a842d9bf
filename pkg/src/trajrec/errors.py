"""Exception types shared across the package.

Everything raised on purpose derives from TrajrecError so callers (and the
command line driver) can tell expected failures from bugs.
"""


class TrajrecError(Exception):
    """Base class for all errors raised by trajrec."""


class ParseError(TrajrecError):
    """A file could not be parsed (malformed JSON, bad PGM header, ...)."""


class ValidationError(TrajrecError):
    """Parsed data violates a structural invariant."""


class InvalidConfig(TrajrecError):
    """A configuration object holds unusable values."""


class DimensionMismatch(TrajrecError):
    """Label maps within one directory disagree on their pixel dimensions."""


class MissingLabelMap(TrajrecError):
    """A frame referenced by observations has no label map."""

    def __init__(self, frame_id: int):
        super().__init__(f"no label map for frame {frame_id}")
        self.frame_id = frame_id


class MissingMesh(TrajrecError):
    """The mesh file referenced by a ground truth scene does not exist."""


class NoCommonFrames(TrajrecError):
    """Two camera sets share no frame ids."""


class NoGroundObservations(TrajrecError):
    """A frame has no usable ground point observations."""

    def __init__(self, frame_id: int):
        super().__init__(f"frame {frame_id} has no ground observations")
        self.frame_id = frame_id


class DegenerateGroundSet(TrajrecError):
    """A local ground set cannot support a plane fit."""


class NearParallel(TrajrecError):
    """A ray is (numerically) parallel to a plane."""


class DegenerateConfiguration(TrajrecError):
    """Point sets are too small or too flat for a similarity fit."""


class EmptyMesh(TrajrecError):
    """An operation needs a mesh with at least one triangle."""


class EmptyObjectCloud(TrajrecError):
    """The object reconstruction contains no 3D points."""


class NonPositiveScale(TrajrecError):
    """A scale ratio must be strictly positive."""


class IllConditionedPair(TrajrecError):
    """A view pair's denominator is numerically unusable for a point."""


class NoValidPairs(TrajrecError):
    """No candidate view pair survives conditioning checks."""


class AllPairsDegenerate(TrajrecError):
    """Every candidate view pair is degenerate; the scale is unobservable."""


class NoValidFrames(TrajrecError):
    """No frame yields a usable ray/ground intersection."""


class FrameMissingFromGroundTruth(TrajrecError):
    """A trajectory frame is absent from the ground truth scene."""

    def __init__(self, frame_id: int):
        super().__init__(f"frame {frame_id} missing from ground truth")
        self.frame_id = frame_id


class NoRayHits(TrajrecError):
    """Every observation ray misses the ground truth mesh."""
