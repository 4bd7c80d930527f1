from .padic import TruncatedPadic, valuation, valuation_str
from .poly import PadicPoly

__all__ = ["TruncatedPadic", "valuation", "valuation_str", "PadicPoly"]
