"""Exception types raised across the toolkit."""


class WaveMambaError(Exception):
    """Base class for all toolkit errors."""


# --- binary file formats ---

class BadMagic(WaveMambaError):
    """File does not start with the expected magic bytes."""


class DimMismatch(WaveMambaError):
    """Payload length disagrees with the header dimensions."""


class NonFinite(WaveMambaError):
    """NaN or Inf encountered where finite values are required."""


class IoFailure(WaveMambaError):
    """Underlying read/write failed."""


class MissingPaletteEntry(WaveMambaError):
    """A label in the map has no palette color."""


class CheckpointError(WaveMambaError):
    """WMCK checkpoint failed validation."""


# --- preprocessing ---

class DegenerateCovariance(WaveMambaError):
    """Band covariance rank is below the requested component count."""


class PatchTooLarge(WaveMambaError):
    """Patch side exceeds a scene dimension."""


class OddPatch(WaveMambaError):
    """Patch side must be even."""


class EmptyClass(WaveMambaError):
    """A class id has no samples."""


# --- numerics / model ---

class ShapeMismatch(WaveMambaError):
    """Operand shapes are incompatible."""


class TargetOutOfRange(WaveMambaError):
    """A class target lies outside [0, K)."""


class NonScalarLoss(WaveMambaError):
    """backward() requires a scalar loss tensor."""


class OddDimension(WaveMambaError):
    """Haar analysis requires even side lengths."""


# --- metrics / training ---

class IdOutOfRange(WaveMambaError):
    """Class id outside the confusion matrix."""


class EmptyMatrix(WaveMambaError):
    """Metric requested on an empty confusion matrix."""


class EmptySplit(WaveMambaError):
    """Training or evaluation split has no samples."""
