"""Exception types shared across the toolkit."""


class SegsweepError(Exception):
    """Base class for all toolkit errors."""


class ShapeMismatchError(SegsweepError, ValueError):
    """Two pixel grids that must share dimensions do not."""

    def __init__(self, what: str, shape_a, shape_b):
        self.shape_a = tuple(shape_a)
        self.shape_b = tuple(shape_b)
        super().__init__(
            f"{what}: {self.shape_a[0]}x{self.shape_a[1]} vs "
            f"{self.shape_b[0]}x{self.shape_b[1]}"
        )


class EmptyDatasetError(SegsweepError, ValueError):
    """An operation that needs at least one image received none."""


class PmapFormatError(SegsweepError, ValueError):
    """A probability-map file failed to parse.

    ``offset`` is the byte position at which the problem was detected.
    """

    def __init__(self, message: str, offset: int):
        self.offset = int(offset)
        super().__init__(f"{message} (byte offset {offset})")


class UnsupportedFormatError(SegsweepError, ValueError):
    """An image file is not in a supported pixel format."""
