"""Decomposition of a chart's special fibre into parametrized branches.

The ambient relations mod p are solved one variable at a time: a relation
linear in T with coefficient a splits the fibre into the locus T = b/a
(with a != 0 recorded as an artifact) and the degenerate locus a = b = 0.
Univariate constraints branch over the roots, possibly in extension
fields.  Each resulting branch presents its piece of the fibre as a
bivariate hypersurface in the two remaining free variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..algebra.bivariate import BiPoly, bi_exact_div
from ..algebra.finitefield import (FFElem, FiniteField, factor_univariate,
                                   poly_deg, roots)
from ..errors import UnsupportedGeometry
from .chart import Chart
from .mpoly import MPoly


@dataclass
class FibreBranch:
    chart_id: int
    field: FiniteField
    free_vars: Tuple[str, str]
    # var -> (num, den) over the free variables; constants are 0-degree MPolys
    subs: Dict[str, Tuple[MPoly, MPoly]]
    equation: BiPoly
    artifacts: List[BiPoly] = field(default_factory=list)

    def full_point(self, s_val: FFElem, t_val: FFElem) -> Optional[Dict[str, FFElem]]:
        """Reconstruct all chart coordinates from free values, or None when a
        substitution denominator vanishes."""
        F = self.field
        pt = {self.free_vars[0]: s_val, self.free_vars[1]: t_val}
        for var, (num, den) in self.subs.items():
            d = den.evaluate(pt)
            if F.is_zero(d):
                return None
            pt[var] = F.mul(num.evaluate(pt), F.inv(d))
        return pt

    def spurious(self, g: BiPoly) -> bool:
        """A factor is an artifact of denominator clearing if it divides one
        of the recorded cleared denominators."""
        for a in self.artifacts:
            if a.is_zero() or a.is_constant():
                continue
            if bi_exact_div(a, g) is not None:
                return True
        return False


def fibre_branches(chart: Chart, F: FiniteField,
                   extension_bound: int = 1) -> List[FibreBranch]:
    """All branches of the chart fibre over F.

    Degenerate univariate constraints with irreducible factors of degree
    d > 1 produce branches over F_{q^d} when d <= extension_bound (counted
    relative to F); beyond the bound they are dropped, which is harmless
    for F-point enumeration and detected separately for component work.
    """
    rels = [MPoly.from_padic(r, F) for r in chart.relations]
    out: List[FibreBranch] = []
    _rec(chart, F, rels, {}, [], extension_bound, out)
    return out


def _rec(chart: Chart, F: FiniteField, pending: List[MPoly],
         subs: Dict[str, Tuple[MPoly, MPoly]], artifacts: List[MPoly],
         extension_bound: int, out: List[FibreBranch]):
    pending = [r for r in pending if not r.is_zero()]
    for r in pending:
        if r.is_constant():
            return                      # inconsistent branch: no points
    if not pending:
        _finalize(chart, F, subs, artifacts, out)
        return
    rel, rest = pending[0], pending[1:]
    # a variable in which the relation is linear
    for var in rel.vars_present():
        if var in subs:
            raise AssertionError("substituted variable resurfaced")
        if rel.degree(var) == 1:
            coeffs = rel.coefficients_in(var)
            a, b = coeffs[1], -coeffs[0]
            # solve branch: var = b / a
            _branch_with_sub(chart, F, var, b, a, rest, subs, artifacts,
                             extension_bound, out)
            # degenerate branch: a = 0 (and then b = 0 follows as a constraint)
            if not a.is_constant():
                _rec(chart, F, [a, b] + rest, dict(subs), list(artifacts),
                     extension_bound, out)
            return
    # no linear variable: univariate constraints branch over their roots
    present = rel.vars_present()
    if len(present) == 1:
        var = present[0]
        coeffs = [c.constant_value() for c in rel.coefficients_in(var)]
        for g, _mult in factor_univariate(F, coeffs):
            d = poly_deg(g)
            if d == 1:
                val = F.neg(g[0])
                _branch_with_sub(chart, F, var, MPoly.constant(val, F),
                                 MPoly.constant(F.one, F), rest, subs,
                                 artifacts, extension_bound, out)
            elif d <= extension_bound:
                big = FiniteField(F.p, F.deg * d)
                phi = F.embed_into(big)
                lifted = [_map_mpoly(r, big, phi) for r in rest]
                new_subs = {v: (_map_mpoly(n, big, phi), _map_mpoly(dd, big, phi))
                            for v, (n, dd) in subs.items()}
                new_art = [_map_mpoly(a, big, phi) for a in artifacts]
                gg = [phi(c) for c in g]
                for root in roots(big, gg):
                    _branch_with_sub(chart, big, var, MPoly.constant(root, big),
                                     MPoly.constant(big.one, big), list(lifted),
                                     dict(new_subs), list(new_art), 1, out)
            # factors beyond the bound are dropped (no F-rational content)
        return
    raise UnsupportedGeometry(
        f"fibre relation {rel} is not linear in any variable: unsupported chart shape")


def _map_mpoly(m: MPoly, big: FiniteField, phi) -> MPoly:
    return MPoly(big, m.variables, {k: phi(v) for k, v in m.terms.items()})


def _branch_with_sub(chart: Chart, F: FiniteField, var: str, num: MPoly,
                     den: MPoly, rest: List[MPoly],
                     subs: Dict[str, Tuple[MPoly, MPoly]], artifacts: List[MPoly],
                     extension_bound: int, out: List[FibreBranch]):
    new_rest = []
    new_artifacts = list(artifacts)
    if not den.is_constant() or den.constant_value() != F.one:
        new_artifacts.append(den)
    for r in rest:
        cleared, _ = r.substitute_cleared(var, num, den)
        new_rest.append(cleared)
    new_subs = {}
    for v, (n, d) in subs.items():
        n2, e1 = n.substitute_cleared(var, num, den)
        d2, e2 = d.substitute_cleared(var, num, den)
        # rescale to a common den power
        if e1 > e2:
            d2 = d2 * den**(e1 - e2)
        elif e2 > e1:
            n2 = n2 * den**(e2 - e1)
        new_subs[v] = (n2, d2)
    new_subs[var] = (num, den)
    _rec(chart, F, new_rest, new_subs, new_artifacts, extension_bound, out)


def _finalize(chart: Chart, F: FiniteField, subs, artifacts, out):
    free = [v for v in chart.variables if v not in subs]
    if len(free) != 2:
        raise UnsupportedGeometry(
            f"branch left {len(free)} free variables on chart {chart.chart_id}")
    s, t = sorted(free)
    gen = MPoly.from_padic(chart.generator, F)
    cleared = gen
    all_art: List[MPoly] = list(artifacts)
    for var, (num, den) in subs.items():
        cleared, _ = cleared.substitute_cleared(var, num, den)
    # iterate until all substituted variables are gone (chained substitutions)
    for _ in range(len(subs) + 1):
        leftover = [v for v in cleared.vars_present() if v not in (s, t)]
        if not leftover:
            break
        for var in leftover:
            num, den = subs[var]
            cleared, _ = cleared.substitute_cleared(var, num, den)
    else:
        raise UnsupportedGeometry("substitution chain did not close")
    arts = []
    for a in all_art:
        cur = a
        for _ in range(len(subs) + 1):
            leftover = [v for v in cur.vars_present() if v not in (s, t)]
            if not leftover:
                break
            for var in leftover:
                num, den = subs[var]
                cur, _ = cur.substitute_cleared(var, num, den)
        if not cur.is_constant():
            arts.append(cur.to_bipoly(s, t))
    if cleared.is_zero():
        raise UnsupportedGeometry(
            f"model generator vanishes identically on a branch of chart "
            f"{chart.chart_id}: fibre is not a hypersurface there")
    out.append(FibreBranch(chart.chart_id, F, (s, t), subs,
                           cleared.to_bipoly(s, t), arts))


def chart_fibre_points(chart: Chart, F: FiniteField):
    """All F-points of the chart's special fibre (deduplicated, sorted)."""
    seen = {}
    for branch in fibre_branches(chart, F):
        s, t = branch.free_vars
        eq = branch.equation
        for sval in F.elements():
            uni = eq.eval_x(sval)
            if not uni:
                cand_ts = list(F.elements())     # identically zero: all t
            else:
                cand_ts = roots(F, uni)
            for tval in cand_ts:
                pt = branch.full_point(sval, tval)
                if pt is None:
                    continue
                if chart.is_excluded(F, pt):
                    continue
                seen[tuple(sorted(pt.items()))] = pt
    return [seen[k] for k in sorted(seen)]
