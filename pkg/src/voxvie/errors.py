"""Exception types shared across the package."""


class VoxvieError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(VoxvieError):
    """Invalid or unparseable run configuration."""


class SizeLimitError(VoxvieError):
    """A dense-oracle or spectrum routine was asked for a problem above its guard."""


class QuadratureError(VoxvieError):
    """Self-term quadrature failed to converge.

    Carries the best achieved relative tolerance in ``achieved``.
    """

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved tolerance {achieved:.3e})")
        self.achieved = achieved


class PreconditionerBuildError(VoxvieError):
    """Preconditioner factorization failed or exceeded its memory cap."""


class PartitionError(VoxvieError):
    """Invalid geometry partition (overlapping or out-of-bounds boxes)."""


class BreakdownError(VoxvieError):
    """GMRES Arnoldi breakdown with the residual still above tolerance."""
