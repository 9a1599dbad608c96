"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: usage errors -> 1, data errors -> 2,
numeric failures -> 3.
"""


class AvstreamError(Exception):
    """Base class for all package errors."""


class DimensionError(AvstreamError):
    """Operand shapes do not conform to a primitive's contract."""


class ContractError(AvstreamError):
    """A documented precondition was violated by the caller."""


class InfeasibleTargetError(ContractError):
    """Target sequence cannot be aligned to the given number of frames."""


class NumericError(AvstreamError):
    """A computation produced NaN/Inf or otherwise failed numerically."""


class GenerationError(AvstreamError):
    """Synthetic corpus generation was asked for an impossible configuration."""


class DataError(AvstreamError):
    """Missing or malformed on-disk artifact (corpus, checkpoint, log)."""
