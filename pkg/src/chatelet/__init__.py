"""Local solubility of Chatelet conic bundles over elliptic curves, point
counting, mod-ell Galois images and finite GL_2 group theory."""

from .arith import QuadRingElement, hilbert_symbol, quad_ring_eval
from .conic import ChateletBundle, ScanReport
from .ec_fp import FpCurve, count_points
from .ec_q import RationalCurve
from .errors import (
    ArgumentError,
    ClassificationError,
    ResourceError,
    UnsupportedFiberError,
    VerificationError,
)

__version__ = "0.1.0"

__all__ = [
    "ArgumentError",
    "ChateletBundle",
    "ClassificationError",
    "FpCurve",
    "QuadRingElement",
    "RationalCurve",
    "ResourceError",
    "ScanReport",
    "UnsupportedFiberError",
    "VerificationError",
    "count_points",
    "hilbert_symbol",
    "quad_ring_eval",
]
