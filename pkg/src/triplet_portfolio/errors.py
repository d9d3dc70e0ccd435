"""Exception types shared across the package.

Everything derives from ValueError so generic callers that catch
ValueError keep working.
"""


class PortfolioError(ValueError):
    """Base class for all errors raised by this package."""


class DataError(PortfolioError):
    """Malformed, missing, or out-of-contract input data."""


class DegenerateSeriesError(PortfolioError):
    """A time series carries no usable fluctuation signal."""


class DegenerateTriangleError(PortfolioError):
    """Triangle vertices are coincident or collinear."""


class SingularMatrixError(PortfolioError):
    """A linear system required by a closed-form solution is singular."""


class GridSizeError(PortfolioError):
    """Requested simplex grid exceeds the configured point ceiling."""


class StageError(PortfolioError):
    """Pipeline failure tagged with the stage that produced it."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")
