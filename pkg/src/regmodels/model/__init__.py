from .chart import Chart, ClosedPoint, Surface, hyperelliptic_surface
from .regularity import is_regular_at, singular_points
from .blowup import blowup
from .resolve import ResolutionTrace, replay, resolve

__all__ = ["Chart", "ClosedPoint", "Surface", "hyperelliptic_surface",
           "is_regular_at", "singular_points", "blowup",
           "ResolutionTrace", "replay", "resolve"]
