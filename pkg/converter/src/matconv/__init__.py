from .core import ConversionManifest, convert, make_synthetic
from .errors import MatConvError, NoNumericArray, ShapeMismatch

__version__ = "0.1.0"

__all__ = [
    "ConversionManifest",
    "convert",
    "make_synthetic",
    "MatConvError",
    "NoNumericArray",
    "ShapeMismatch",
    "__version__",
]
