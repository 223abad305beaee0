"""Exception hierarchy shared by all modules.

Every error carries an ``exit_code`` so the CLI can map failures onto its
exit-code contract: 2 for validation problems, 4 for numerical failures on
well-formed input. Plain I/O problems are left as ``OSError`` (exit 3).
"""

from __future__ import annotations


class ModixError(Exception):
    """Base class for errors raised by this package."""

    exit_code = 4


class ValidationError(ModixError):
    """Invalid input data, file content, or configuration."""

    exit_code = 2


class NumericalError(ModixError):
    """A numerical routine failed on input that passed validation."""

    exit_code = 4


# --- container / sequence validation -----------------------------------

class ContainerError(ValidationError):
    """Malformed embedding container file."""


class MagicMismatchError(ContainerError):
    """File does not start with the expected magic bytes."""


class UnsupportedVersionError(ContainerError):
    """Container version is not supported by this reader."""


class TruncatedPayloadError(ContainerError):
    """Declared segment sizes exceed the file length."""


class TrailingDataError(ContainerError):
    """File contains bytes beyond the declared payloads."""


class NonFiniteValueError(ValidationError):
    """An embedding value is NaN or infinite."""


class DimensionMismatchError(ValidationError):
    """Matrix or vector dimensions are inconsistent."""


class InvalidSequenceError(ValidationError):
    """Sequence violates its structural invariants."""


class InvalidGeneratorSpecError(ValidationError):
    """Synthetic-sequence generator parameters are out of range."""


class EmptySegmentError(ValidationError):
    """An operation received a segment with no rows."""


# --- contribution pipeline ----------------------------------------------

class NonPositiveEntropyError(ValidationError):
    """Raw-ratio normalization requires strictly positive entropies."""


class NonPositiveContributionError(ValidationError):
    """A contribution entry is negative where positivity is required."""


class AlphaOutOfRangeError(ValidationError):
    """Fusion weight alpha lies outside [0, 1]."""


class FactorizationError(NumericalError):
    """Both the triangular factorization and the eigendecomposition failed."""


# --- stride / harness ----------------------------------------------------

class ZeroContributionError(ValidationError):
    """Stride is undefined because a unified contribution is not positive."""


class InvalidStrideError(ValidationError):
    """Positional stride must be a finite positive number."""


class EmptyLayoutError(ValidationError):
    """Layout has no segments or a segment with a non-positive count."""


class LengthMismatchError(ValidationError):
    """Position plan does not match the harness token counts."""


class OracleSizeExceededError(ValidationError):
    """Input exceeds the size cap of the brute-force oracle."""
