"""Subgame perfect gradient methods with variable-metric restarts."""
from ._jit import NUMBA_ENABLED
from .metric import IDENTITY, CurvaturePair, Geometry, build_geometry
from .trace import RunTrace, Status, TraceRecord

__all__ = ["NUMBA_ENABLED", "IDENTITY", "CurvaturePair", "Geometry", "build_geometry",
           "RunTrace", "Status", "TraceRecord"]
__version__ = "0.1.0"
