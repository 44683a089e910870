class MatConvError(Exception):
    """Base class for converter failures."""


class ShapeMismatch(MatConvError):
    """Scene and ground-truth spatial dimensions disagree."""


class NoNumericArray(MatConvError):
    """No usable numeric array found in a container file."""
