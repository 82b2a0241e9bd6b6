"""Exception types raised across the preview pipeline.

All library errors derive from :class:`CTPrevError` so callers can catch
one base class at pipeline boundaries while tests assert precise types.
"""


class CTPrevError(Exception):
    """Base class for all errors raised by this package."""


class InvalidManifest(CTPrevError):
    """A manifest file is structurally unusable (bad JSON, missing keys, no slices)."""


class MissingSlice(CTPrevError):
    """A slice image referenced by a stack manifest does not exist."""


class DimensionMismatch(CTPrevError):
    """Slice or volume dimensions disagree with what the rest of the data implies."""


class UnsupportedPixelFormat(CTPrevError):
    """Pixel data is not 8-bit single-channel grayscale."""


class RangeOutOfBounds(CTPrevError):
    """A slab, bin, or threshold parameter lies outside its valid range."""


class InvalidTarget(CTPrevError):
    """Downscale target is empty or larger than the source along some axis."""


class InvalidSpec(CTPrevError):
    """A phantom or view specification is internally inconsistent."""


class EmptyHistogram(CTPrevError):
    """Histogram carries no mass at all."""


class DegenerateHistogram(CTPrevError):
    """All histogram mass sits in a single bin; no threshold separates anything."""


class EmptyRegion(CTPrevError):
    """An iteration produced a histogram region with zero mass."""


class NonConvergence(CTPrevError):
    """Iterative threshold selection hit its iteration cap without a fixed point."""


class NoCircleFound(CTPrevError):
    """No circle candidate reached the acceptance vote floor."""


class CircleOutOfBounds(CTPrevError):
    """Circle center lies outside the slice it is applied to."""


class UnsupportedScheme(CTPrevError):
    """Requested slicemap edge length has no planned atlas layout."""


class ManifestMismatch(CTPrevError):
    """Slicemap files on disk disagree with their manifest."""


class IndexOutOfRange(CTPrevError):
    """Slice index outside the encoded range of a slicemap scheme."""


class EmptyVolume(CTPrevError):
    """Volume contains no foreground at all where some is required."""
