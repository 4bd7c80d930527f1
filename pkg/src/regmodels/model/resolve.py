"""The resolution driver: blow up singular points until regular.

The next centre is always the first singular point in a deterministic
order (owning chart index, then lexicographic point data), so identical
inputs yield bit-identical traces.  Termination is enforced by an explicit
step budget; the driver reports rather than truncates when it runs out.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

from ..errors import StepBudgetExhausted
from .blowup import blowup, blowup_curve, curve_marker_for_piece
from .chart import ClosedPoint, CurveMarker, Surface
from .regularity import NonIsolatedLocus, singular_points


@dataclass
class ResolutionTrace:
    centres: List[object] = field(default_factory=list)   # ClosedPoint | CurveMarker
    surface: Surface = None

    @property
    def blowup_count(self) -> int:
        return len(self.centres)


def resolve(surface: Surface, max_steps: int = 12,
            degree_bound: int = 4) -> ResolutionTrace:
    trace = ResolutionTrace()
    current = surface
    for _ in range(2 * max_steps + 2):
        try:
            sing = singular_points(current, degree_bound)
        except NonIsolatedLocus as locus:
            if len(trace.centres) >= max_steps:
                raise StepBudgetExhausted(
                    f"resolution did not terminate within {max_steps} blowups")
            chart = current.charts[locus.chart_id]
            marker = curve_marker_for_piece(chart, locus.branch, locus.equation)
            current = blowup_curve(current, marker)
            trace.centres.append(marker)
            continue
        if not sing:
            trace.surface = current
            return trace
        if len(trace.centres) >= max_steps:
            raise StepBudgetExhausted(
                f"resolution did not terminate within {max_steps} blowups; "
                f"{len(sing)} singular points remain")
        centre = sing[0]
        current = blowup(current, centre)
        trace.centres.append(centre)
    raise StepBudgetExhausted("resolution loop overran its budget")


def replay(surface: Surface, trace: ResolutionTrace) -> Surface:
    """Re-run the recorded centres from the initial model."""
    current = surface
    for centre in trace.centres:
        if isinstance(centre, CurveMarker):
            current = blowup_curve(current, centre)
        else:
            current = blowup(current, centre)
    return current
