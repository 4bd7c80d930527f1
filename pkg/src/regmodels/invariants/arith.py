"""Arithmetic invariants read off the special fibre: Tamagawa number,
index, deficiency, local solubility, and point counts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from ..algebra.finitefield import FiniteField, roots
from ..errors import DegreeBoundExceeded
from ..model.branches import fibre_branches
from ..model.chart import Surface, eval_mod_p
from .compgroup import ComponentGroup
from .fibre import SpecialFibre, _point_on_piece


@dataclass
class TamagawaResult:
    value: int
    split: bool

    def as_dict(self):
        return {"value": self.value, "split": self.split}


def tamagawa(fibre: SpecialFibre, group: ComponentGroup) -> TamagawaResult:
    """|group| in the split case; otherwise the geometric order flagged
    split=False (no Galois descent on the component group is attempted)."""
    split = all(e == 1 for e in fibre.constant_degrees) and \
        all(cp.degree == fibre.base_degree
            for _, cp, _ in fibre.intersection_points)
    return TamagawaResult(group.order, split)


def index_and_deficiency(fibre: SpecialFibre, genus: int) -> Tuple[int, bool]:
    """I = gcd_i(d_i e_i); the curve is deficient iff I does not divide g-1."""
    I = 0
    for comp in fibre.components:
        I = _gcd(I, comp.multiplicity * comp.constant_degree)
    deficient = (genus - 1) % I != 0
    return I, deficient


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def locally_soluble(fibre: SpecialFibre) -> bool:
    """True iff the smooth locus of the fibre has a k-point on a
    multiplicity-1 component (reduction-map surjectivity over Henselian R).

    A k-point of the fibre scheme is in the smooth locus iff the Jacobian
    of the chart equations mod p has full rank there."""
    surface = fibre.surface
    F = FiniteField(surface.p, fibre.base_degree)
    for chart in surface.active_charts():
        gens = list(chart.relations) + [chart.generator]
        names = chart.variables
        for pt in _chart_points(chart, F):
            mat = [[eval_mod_p(g.partial(v).truncate(1), F, pt) for v in names]
                   for g in gens]
            if _rank(F, mat) == len(gens):
                return True
    if not surface.atlas_complete:
        raise DegreeBoundExceeded(
            "no smooth point found, but the atlas is incomplete after a "
            "curve blowup: solubility is undecidable here")
    return False


def count_points(fibre: SpecialFibre, q: int) -> int:
    """#C_s(F_q) by chart-wise enumeration with gluing deduplication."""
    surface = fibre.surface
    if not surface.atlas_complete:
        raise DegreeBoundExceeded(
            "point counts are unavailable: the atlas is incomplete after a "
            "curve blowup")
    p = surface.p
    deg = 0
    qq = q
    while qq > 1:
        if qq % p:
            raise DegreeBoundExceeded(f"{q} is not a power of p = {p}")
        qq //= p
        deg += 1
    F = FiniteField(p, deg)
    keys = set()
    for chart in surface.active_charts():
        for pt in _chart_points(chart, F):
            keys.add(surface.canonical_point_key(chart.chart_id, pt, F))
    return len(keys)


def _chart_points(chart, F: FiniteField):
    from ..model.branches import chart_fibre_points
    return chart_fibre_points(chart, F)


def _rank(F: FiniteField, mat) -> int:
    mat = [row[:] for row in mat]
    rank, col = 0, 0
    rows = len(mat)
    cols = len(mat[0]) if mat else 0
    while rank < rows and col < cols:
        sel = next((i for i in range(rank, rows)
                    if not F.is_zero(mat[i][col])), None)
        if sel is None:
            col += 1
            continue
        mat[rank], mat[sel] = mat[sel], mat[rank]
        inv = F.inv(mat[rank][col])
        mat[rank] = [F.mul(x, inv) for x in mat[rank]]
        for i in range(rows):
            if i != rank and not F.is_zero(mat[i][col]):
                f = mat[i][col]
                mat[i] = [F.sub(a, F.mul(f, b)) for a, b in zip(mat[i], mat[rank])]
        rank += 1
        col += 1
    return rank
