"""Exception types raised by sphds."""


class SphdsError(Exception):
    """Base class for all sphds errors."""


class InvalidResolutionError(SphdsError, ValueError):
    pass


class PixelDomainError(SphdsError, ValueError):
    """Pixel index, ring number or coordinate outside its valid domain."""


class OrderingError(SphdsError, ValueError):
    """Operation requires a different pixel ordering scheme."""


class NoParentError(SphdsError, ValueError):
    pass


class UndefinedDirectionError(SphdsError, ValueError):
    pass


class WindowError(SphdsError, ValueError):
    """Malformed spherical window (non-convex, degenerate, too many vertices)."""


class DuplicatePixelError(SphdsError, ValueError):
    def __init__(self, pixel, rows):
        self.pixel = int(pixel)
        self.rows = tuple(int(r) for r in rows)
        super().__init__(f"rows {self.rows} map to the same pixel {self.pixel}")


class IngestError(SphdsError):
    """CSV ingestion failed (missing file, missing column, no usable rows)."""


class DatasetFormatError(SphdsError, ValueError):
    pass


class EmptySubsetError(SphdsError, ValueError):
    """A statistic was requested over an empty or too small row set."""


class SeparationError(SphdsError, ValueError):
    """No resolution up to the limit puts every point in its own pixel."""
