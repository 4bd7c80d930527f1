"""Canonical JSON forms for surfaces and traces (golden tests, replay)."""

from __future__ import annotations

from typing import Dict

from ..algebra.poly import PadicPoly
from .chart import Chart, ClosedPoint, Surface


def poly_to_json(poly: PadicPoly):
    return {
        "variables": list(poly.variables),
        "terms": [[list(e), c] for e, c in sorted(poly.terms.items())],
        "precision": poly.precision,
    }


def closed_point_to_json(cp: ClosedPoint):
    return {
        "chart": cp.chart_id,
        "prim": cp.prim,
        "min_poly": list(cp.min_poly),
        "coords": {v: list(c) for v, c in cp.coords},
        "degree": cp.degree,
    }


def chart_to_json(chart: Chart):
    return {
        "id": chart.chart_id,
        "variables": list(chart.variables),
        "relations": [poly_to_json(r) for r in chart.relations],
        "generator": poly_to_json(chart.generator),
        "exceptional": [[lbl, poly_to_json(e)] for lbl, e in chart.exceptional],
        "parent": chart.parent_id,
        "family": chart.family,
        "root": chart.root_id,
        "active": chart.active,
        "excluded": [closed_point_to_json(cp) for cp in chart.excluded],
        "gluing": {
            "to_parent": {v: poly_to_json(e) for v, e in sorted(chart.to_parent.items())},
            "from_parent": {v: [poly_to_json(n), poly_to_json(d)]
                            for v, (n, d) in sorted(chart.from_parent.items())},
            "siblings": {str(sid): {v: [poly_to_json(n), poly_to_json(d)]
                                    for v, (n, d) in sorted(m.items())}
                         for sid, m in sorted(chart.sibling_maps.items())},
        },
    }


def surface_to_json(surface: Surface) -> Dict:
    return {
        "p": surface.p,
        "precision": surface.precision,
        "charts": [chart_to_json(c) for _, c in sorted(surface.charts.items())],
        "root_gluing": {f"{a}->{b}": {v: [poly_to_json(n), poly_to_json(d)]
                                      for v, (n, d) in sorted(m.items())}
                        for (a, b), m in sorted(surface.root_gluing.items())},
    }
