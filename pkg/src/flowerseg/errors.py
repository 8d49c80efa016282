"""Exception types shared across the package."""


class FlowerSegError(Exception):
    """Base class for all flowerseg errors."""


class UnreadableFile(FlowerSegError):
    """File is missing or cannot be opened."""


class UnsupportedFormat(FlowerSegError):
    """File exists but is not a raster format we decode."""


class CorruptData(FlowerSegError):
    """File was recognized but its contents are damaged."""


class IoFailure(FlowerSegError):
    """Writing an output file failed."""


class InvalidSpec(FlowerSegError):
    """Tile size / overlap parameters are out of range."""


class LayoutMismatch(FlowerSegError):
    """A tile or layout does not belong to the raster it is applied to."""


class CountMismatch(FlowerSegError):
    """Number of score maps does not match the number of tiles."""


class ShapeMismatch(FlowerSegError):
    """Array dimensions disagree where they must match."""


class MissingScoreFile(FlowerSegError):
    """A precomputed score-map sidecar file is absent."""


class EmptyDataset(FlowerSegError):
    """An operation requires at least one image."""


class EmptySelection(FlowerSegError):
    """No pixels were selected for a statistic."""


class EmptyStrokes(FlowerSegError):
    """Scribble refinement requires at least one stroke pixel per class."""


class OverlappingStrokes(FlowerSegError):
    """Foreground and background stroke sets share pixels."""


class UnpairedFiles(FlowerSegError):
    """Prediction and ground-truth directories do not pair up by filename."""


class RefinementFallbackWarning(UserWarning):
    """Emitted when refinement degrades to direct thresholding."""
