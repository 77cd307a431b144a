"""Near-duplicate image retrieval over social feeds."""

from .methods import METHOD_NAMES, make_method
from .verdict import SimilarityVerdict

__version__ = "0.1.0"

__all__ = ["METHOD_NAMES", "make_method", "SimilarityVerdict", "__version__"]
