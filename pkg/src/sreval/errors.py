"""Domain error types shared across the toolkit.

Every error the library raises on purpose derives from SrevalError so the
CLI can map domain failures to exit code 1 while genuine bugs still
surface as ordinary tracebacks.
"""


class SrevalError(Exception):
    """Base class for all domain errors raised by this package."""


class UnsupportedFormat(SrevalError):
    """Image file is not an 8-bit grayscale/RGB PNG (16-bit, palette, alpha...)."""


class DimensionMismatch(SrevalError):
    """Two images or planes that must share dimensions do not."""


class DimensionTooSmall(SrevalError):
    """Input smaller than the operation's minimum size (decimation, SSIM window, DFT)."""


class ZeroTotal(SrevalError):
    """Ring spectrum of a blank image has no energy to normalize by."""


class EmptyClass(SrevalError):
    """Focus calibration needs at least one image per class."""


class GridMismatch(SrevalError):
    """Masks being compared live on different pixel grids."""


class BothEmpty(SrevalError):
    """IoU of two empty masks is undefined."""


class EmptyGroundTruth(SrevalError):
    """Segmentation evaluation requires at least one ground-truth instance."""


class ZeroBaseline(SrevalError):
    """Percent change is undefined for a non-positive baseline."""


class DegenerateVariance(SrevalError):
    """Pearson correlation needs >= 2 points and non-zero variance per axis."""


class EmptyInput(SrevalError):
    """Histogram or aggregate asked for on an empty collection."""


class SchemaError(SrevalError):
    """Manifest/config/annotation file does not match its documented schema."""


class MissingFile(SrevalError):
    """Manifest references files that do not exist."""


class DuplicatePairId(SrevalError):
    """Manifest contains the same pair id more than once."""


class EmptyManifest(SrevalError):
    """Operation requires a manifest with at least one pair."""


class NonZeroExit(SrevalError):
    """External SR command exited with a non-zero status (stderr attached)."""


class SrToolTimeout(SrevalError):
    """External SR command exceeded its time budget."""


class BadOutputDims(SrevalError):
    """External SR output has neither input x scale nor input dimensions."""


class MissingOutput(SrevalError):
    """External SR command exited 0 but produced no output file."""
