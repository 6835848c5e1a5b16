"""Exception types shared across the library."""


class TrajConstrainError(Exception):
    """Base class for all library errors."""


class DimensionMismatchError(TrajConstrainError):
    """State dimension does not match region or model dimension."""


class ZeroSupportError(TrajConstrainError):
    """No birth/death pair in the density overlaps any constraint time."""


class PartitionBudgetError(TrajConstrainError):
    """Too many active constraints for explicit partition enumeration."""


class LowAcceptanceError(TrajConstrainError):
    """Rejection-sampling acceptance rate fell below the usable floor."""


class DegenerateDensityError(TrajConstrainError):
    """Operation requires a non-degenerate constrained density."""


class ConfigError(TrajConstrainError):
    """Invalid run configuration."""
