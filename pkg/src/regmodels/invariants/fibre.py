"""Special fibre extraction on a resolved surface.

Per chart, the fibre decomposes into branches; the branch equations factor
into irreducible components with multiplicities (the fibre exponent equals
v_xi(pi), which the local-ring engine cross-checks).  Components are glued
across charts by transporting sampled points.  The intersection matrix is
assembled from local intersection numbers, each computed as the F_p-
dimension of the local quotient ring at a common closed point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..algebra.bivariate import BiPoly, bi_exact_div, factor_bivariate
from ..algebra.finitefield import FiniteField, poly_deg, roots
from ..algebra.poly import PadicPoly
from ..errors import (DegreeBoundExceeded, PrecisionExhausted,
                      UnsupportedGeometry)
from ..model.branches import FibreBranch, fibre_branches
from ..model.chart import (Chart, ClosedPoint, Surface,
                           canonical_closed_point_key, closed_point_from_ff,
                           eval_mod_p)
from ..model.mpoly import MPoly
from ..model.regularity import _solve_bivariate_system, _strip_artifacts
from .localring import (ComponentPresentation, ValuationEngine,
                        element_from_chart_poly, presentation_for_component)


@dataclass
class ComponentPiece:
    """One chart-and-branch view of a fibre component."""
    chart_id: int
    branch: FibreBranch
    equation: BiPoly
    multiplicity: int


@dataclass
class Component:
    index: int
    pieces: List[ComponentPiece]
    multiplicity: int                 # d_i
    constant_degree: int              # e_i
    sample_points: List[Tuple[int, FiniteField, dict]] = field(default_factory=list)

    def piece_on(self, chart_id: int) -> Optional[ComponentPiece]:
        for piece in self.pieces:
            if piece.chart_id == chart_id:
                return piece
        return None

    def key(self):
        piece = self.pieces[0]
        return (piece.chart_id, piece.branch.free_vars,
                piece.equation.canonical_key())


@dataclass
class SpecialFibre:
    surface: Surface
    base_degree: int                      # fibre computed over F_{p^base_degree}
    components: List[Component]
    intersection_matrix: List[List[int]]  # degree-weighted over the base field
    intersection_points: List[Tuple[int, ClosedPoint, Dict[int, int]]]
    # (chart, point, {component index: local multiplicity contribution})

    @property
    def multiplicities(self) -> List[int]:
        return [c.multiplicity for c in self.components]

    @property
    def constant_degrees(self) -> List[int]:
        return [c.constant_degree for c in self.components]

    def adjunction_check(self) -> bool:
        d = self.multiplicities
        M = self.intersection_matrix
        return all(sum(d[j] * M[i][j] for j in range(len(d))) == 0
                   for i in range(len(d)))


def special_fibre(surface: Surface, degree_bound: int = 4,
                  base_degree: int = 1) -> SpecialFibre:
    """Extract components, multiplicities, constant-field degrees and the
    intersection matrix.  base_degree > 1 computes the fibre after the
    unramified base change to F_{p^base_degree} (used for the geometric
    component group)."""
    p = surface.p
    F = FiniteField(p, base_degree)
    pieces: List[ComponentPiece] = []
    from ..model.regularity import _piece_excluded
    for chart in surface.active_charts():
        for branch in fibre_branches(chart, F):
            eq = _strip_artifacts(branch.equation, branch)
            if eq.is_constant():
                continue
            for g, m in factor_bivariate(eq):
                if g.total_degree() < 1 or branch.spurious(g):
                    continue
                if _piece_excluded(chart, branch, g):
                    continue
                pieces.append(ComponentPiece(chart.chart_id, branch, g, m))
    components = _merge_pieces(surface, F, pieces, degree_bound)
    for comp in components:
        comp.constant_degree = _constant_degree(comp, F, degree_bound)
        _check_multiplicity(surface, comp)
    matrix, ipoints = _intersection_data(surface, F, components, degree_bound)
    fibre = SpecialFibre(surface, base_degree, components, matrix, ipoints)
    if surface.atlas_complete and not fibre.adjunction_check():
        raise UnsupportedGeometry(
            "intersection matrix failed the fibre-degree relation")
    return fibre


# ---------------------------------------------------------------------------
# component identification across charts
# ---------------------------------------------------------------------------


def _sample_points(surface: Surface, F: FiniteField, piece: ComponentPiece,
                   want: int, degree_bound: int):
    """Up to `want` distinct points on the component piece, over extensions
    of F; returns [(field, full chart coords)]."""
    out = []
    seen = set()
    rel_bound = max(1, degree_bound // F.deg)
    for j in range(1, rel_bound + 1):
        big = F if j == 1 else FiniteField(F.p, F.deg * j)
        phi = (lambda c: c) if j == 1 else F.embed_into(big)
        eq = piece.equation if j == 1 else piece.equation.map_into(big, phi)
        branch = piece.branch
        if j == 1:
            lifted = branch
        else:
            from ..model.branches import FibreBranch as FB
            lifted = FB(branch.chart_id, big, branch.free_vars,
                        {v: (_mp_into(n, big, phi), _mp_into(d, big, phi))
                         for v, (n, d) in branch.subs.items()},
                        eq)
        s, t = lifted.free_vars
        for sval in big.elements():
            uni = eq.eval_x(sval)
            if not uni:
                continue
            for tval in roots(big, uni):
                pt = lifted.full_point(sval, tval)
                if pt is None:
                    continue
                if surface.charts[piece.chart_id].is_excluded(big, pt):
                    continue
                key = (big.deg, tuple(sorted(pt.items())))
                if key in seen:
                    continue
                seen.add(key)
                out.append((big, pt))
                if len(out) >= want:
                    return out
    return out


def _mp_into(m: MPoly, big: FiniteField, phi) -> MPoly:
    return MPoly(big, m.variables, {k: phi(v) for k, v in m.terms.items()})


def _point_on_piece(surface: Surface, piece: ComponentPiece,
                    big: FiniteField, pt: dict) -> bool:
    """Does a full-coordinate point lie on this component piece?"""
    branch = piece.branch
    base = branch.field
    if base.deg == big.deg:
        phi = lambda c: c
    elif big.deg % base.deg == 0:
        phi = base.embed_into(big)
    else:
        return False
    s, t = branch.free_vars
    eq = piece.equation.map_into(big, phi)
    if not big.is_zero(eq.eval_point(pt[s], pt[t])):
        return False
    for var, (num, den) in branch.subs.items():
        nb = _mp_into(num, big, phi)
        db = _mp_into(den, big, phi)
        dval = db.evaluate(pt)
        if big.is_zero(dval):
            return False
        if pt[var] != big.mul(nb.evaluate(pt), big.inv(dval)):
            return False
    return True


def _merge_pieces(surface: Surface, F: FiniteField,
                  pieces: List[ComponentPiece], degree_bound: int) -> List[Component]:
    n = len(pieces)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        parent[find(i)] = find(j)

    samples = {}
    maxdeg = max((q.equation.total_degree() for q in pieces), default=1)
    for i, piece in enumerate(pieces):
        deg_i = piece.equation.total_degree()
        want = deg_i * maxdeg + 21
        samples[i] = _sample_points(surface, F, piece, want, degree_bound)

    for i in range(n):
        for j in range(i + 1, n):
            a, b = pieces[i], pieces[j]
            if a.chart_id == b.chart_id and a.branch is b.branch:
                continue                     # distinct factors of one branch
            if find(i) == find(j):
                continue
            need = a.equation.total_degree() * b.equation.total_degree() + 1
            matched = 0
            visible = 0
            for big, pt in samples[i]:
                img = surface.transport(a.chart_id, pt, big, b.chart_id)
                if img is None:
                    continue
                bchart = surface.charts[b.chart_id]
                if not bchart.on_fibre(big, img):
                    continue
                visible += 1
                if _point_on_piece(surface, b, big, img):
                    matched += 1
                if matched > need:
                    break
            # distinct components share at most need-1 points; with the
            # generous sample budget a shared component always clears the
            # Bezout bound (chart overlaps are cofinite in the component)
            if matched > need:
                union(i, j)
            elif 0 < matched <= need and matched > 0.8 * visible and visible >= 12:
                raise UnsupportedGeometry(
                    "ambiguous component identification across charts")

    groups: Dict[int, List[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    components = []
    for root in sorted(groups, key=lambda r: min(
            (pieces[i].chart_id, pieces[i].equation.canonical_key())
            for i in groups[r])):
        idxs = groups[root]
        plist = [pieces[i] for i in sorted(
            idxs, key=lambda i: (pieces[i].chart_id,
                                 pieces[i].equation.canonical_key()))]
        mults = {piece.multiplicity for piece in plist}
        if len(mults) != 1:
            raise UnsupportedGeometry(
                "component multiplicity disagrees across charts: " +
                str([(q.chart_id, q.multiplicity) for q in plist]))
        comp = Component(index=len(components), pieces=plist,
                         multiplicity=plist[0].multiplicity, constant_degree=1)
        comp.sample_points = [(plist[0].chart_id, big, pt)
                              for big, pt in samples[idxs[0]]]
        components.append(comp)
    return components


def _constant_degree(comp: Component, F: FiniteField, degree_bound: int) -> int:
    """[kbar cap K(Gamma) : k] detected through factor counts over
    extensions: over F_{q^j} the equation splits into gcd(e, j) factors."""
    g = comp.pieces[0].equation
    counts = {1: len(factor_bivariate(g))}
    if counts[1] != 1:
        raise UnsupportedGeometry("component equation is not irreducible")
    rel_bound = max(1, degree_bound // F.deg)
    for j in range(2, rel_bound + 1):
        big = FiniteField(F.p, F.deg * j)
        phi = F.embed_into(big)
        counts[j] = len(factor_bivariate(g.map_into(big, phi)))
    candidates = [e for e in range(1, rel_bound + 1)
                  if all(counts[j] == _gcd(e, j) for j in counts)]
    if not candidates:
        raise DegreeBoundExceeded(
            f"constant-field degree exceeds the bound {degree_bound}")
    return max(candidates)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def _check_multiplicity(surface: Surface, comp: Component):
    """Cross-check the fibre exponent against v_xi(pi) where presentable."""
    for piece in comp.pieces:
        if piece.branch.field.deg != 1:
            continue
        chart = surface.charts[piece.chart_id]
        try:
            pres = presentation_for_component(chart, piece.branch,
                                              piece.equation, piece.multiplicity)
        except UnsupportedGeometry:
            continue
        engine = ValuationEngine(pres)
        v = engine.pi_multiplicity_check()
        if v != comp.multiplicity:
            raise UnsupportedGeometry(
                f"multiplicity mismatch: fibre exponent {comp.multiplicity}, "
                f"v_xi(pi) = {v}")
        return


# ---------------------------------------------------------------------------
# intersection numbers
# ---------------------------------------------------------------------------


def _intersection_data(surface: Surface, F: FiniteField,
                       components: List[Component], degree_bound: int):
    n = len(components)
    matrix = [[0] * n for _ in range(n)]
    ipoints: List[Tuple[int, ClosedPoint, Dict[int, int]]] = []
    seen_keys = {}
    for i in range(n):
        for j in range(i + 1, n):
            for chart in surface.active_charts():
                pi = components[i].piece_on(chart.chart_id)
                pj = components[j].piece_on(chart.chart_id)
                if pi is None or pj is None:
                    continue
                found = list(_common_points(surface, chart, pi, pj, degree_bound))
                found += list(_common_points(surface, chart, pj, pi, degree_bound))
                for big, full in found:
                    # conjugate points over the base are counted one by one,
                    # each at its own coordinates
                    key = (big.deg, surface.canonical_point_key(
                        chart.chart_id, full, big))
                    if (i, j) in seen_keys.get(key, set()):
                        continue
                    length = _geometric_length(chart, big, full,
                                               components[i], components[j])
                    if length <= 0:
                        raise UnsupportedGeometry(
                            "vanishing local length at a common point")
                    matrix[i][j] += length
                    matrix[j][i] += length
                    seen_keys.setdefault(key, set()).add((i, j))
                    cp = closed_point_from_ff(chart.chart_id, surface.p,
                                              full, big)
                    ipoints.append((chart.chart_id, cp, {i: length, j: length}))
    d = [c.multiplicity for c in components]
    for i in range(n):
        off = sum(d[j] * matrix[i][j] for j in range(n) if j != i)
        if d[i] == 0 or off % d[i]:
            raise UnsupportedGeometry("self-intersection is not integral")
        matrix[i][i] = -off // d[i]
    return matrix, ipoints


def _common_points(surface: Surface, chart: Chart, pi: ComponentPiece,
                   pj: ComponentPiece, degree_bound: int):
    """Closed points lying on both component pieces of one chart."""
    F = pi.branch.field
    if F.deg != pj.branch.field.deg:
        raise UnsupportedGeometry("mixed branch fields in intersection search")
    s, t = pi.branch.free_vars
    system = [pi.equation]
    # restrict pj's chart ideal to pi's branch
    constrained = False
    for gen in _component_chart_ideal_mp(pj):
        cur = gen
        for var, (num, den) in pi.branch.subs.items():
            cur, _ = cur.substitute_cleared(var, num, den)
        leftover = [v for v in cur.vars_present() if v not in (s, t)]
        if leftover:
            raise UnsupportedGeometry("intersection restriction left variables")
        restricted = _strip_artifacts(cur.to_bipoly(s, t), pi.branch)
        if restricted.is_zero():
            continue
        if restricted.is_constant():
            return []                    # empty intersection on this branch
        if bi_exact_div(restricted, pi.equation) is not None:
            # this generator vanishes along all of Gamma_i: no constraint
            continue
        constrained = True
        system.append(restricted)
    if not constrained:
        return []
    out = []
    seen = set()
    for big, pt in _solve_bivariate_system(system, F, degree_bound):
        full = _branch_point_lift(pi.branch, big, pt)
        if full is None:
            continue
        if not _on_component_closure(pi, big, full) or \
                not _on_component_closure(pj, big, full):
            continue
        if chart.is_excluded(big, full):
            continue
        k = (big.deg, tuple(sorted(full.items())))
        if k in seen:
            continue
        seen.add(k)
        out.append((big, full))
    return out


def _on_component_closure(piece: ComponentPiece, big: FiniteField,
                          pt: dict) -> bool:
    base = piece.branch.field
    if base.deg == big.deg:
        phi = lambda c: c
    elif big.deg % base.deg == 0:
        phi = base.embed_into(big)
    else:
        return False
    for g in _component_chart_ideal_mp(piece):
        gb = _mp_into(g, big, phi)
        if not big.is_zero(gb.evaluate({v: pt[v] for v in gb.vars_present()})):
            return False
    return True


def _component_chart_ideal_mp(piece: ComponentPiece) -> List[MPoly]:
    """Generators cutting out the component's closure on its chart.

    For a substitution var = 0/den the closure constraint is var itself
    (tighter than var*den, which would adjoin the den = 0 junk locus)."""
    gens = [MPoly.from_bipoly(piece.equation)]
    for var, (num, den) in piece.branch.subs.items():
        if num.is_zero():
            gens.append(MPoly.var(var, piece.branch.field))
        else:
            gens.append(MPoly.var(var, piece.branch.field) * den - num)
    return gens


def _branch_point_lift(branch: FibreBranch, big: FiniteField, pt: dict):
    if branch.field.deg == big.deg:
        return branch.full_point(pt[branch.free_vars[0]], pt[branch.free_vars[1]])
    phi = branch.field.embed_into(big)
    from ..model.branches import FibreBranch as FB
    lifted = FB(branch.chart_id, big, branch.free_vars,
                {v: (_mp_into(n, big, phi), _mp_into(d, big, phi))
                 for v, (n, d) in branch.subs.items()},
                branch.equation.map_into(big, phi))
    return lifted.full_point(pt[branch.free_vars[0]], pt[branch.free_vars[1]])


def _geometric_length(chart: Chart, big: FiniteField, coords: dict,
                      comp_i: Component, comp_j: Component) -> int:
    """Local intersection number at one geometric point with coordinates in
    `big`.  Both component ideals contain pi, so the quotient O/(I_i + I_j)
    is a mod-p object; translating the point to the origin makes reduction
    mod m^cap a plain degree truncation."""

    def into_big(m: MPoly) -> MPoly:
        if m.F.deg == big.deg:
            return m
        phi = m.F.embed_into(big)
        return MPoly(big, m.variables, {k: phi(v) for k, v in m.terms.items()})

    gens: List[MPoly] = []
    for g in list(chart.relations) + [chart.generator]:
        gens.append(MPoly.from_padic(g, big))
    for comp in (comp_i, comp_j):
        piece = comp.piece_on(chart.chart_id)
        gens += [into_big(g) for g in _component_chart_ideal_mp(piece)]
    variables = sorted(chart.variables)
    shifted = []
    for g in gens:
        cur = g
        for v in variables:
            if v in cur.variables:
                cur = cur.substitute_poly(
                    v, MPoly.var(v, big) + MPoly.constant(coords[v], big))
        shifted.append(cur)
    prev = None
    for cap in range(2, 10):
        dim = _truncated_quotient_dim(big, variables, shifted, cap)
        if dim == prev:
            return dim
        prev = dim
    raise PrecisionExhausted("local intersection length did not stabilize")


def _truncated_quotient_dim(F: FiniteField, variables, gens: List[MPoly],
                            cap: int) -> int:
    """dim_F of F[vars]/(gens + m^cap) with m the origin; truncation at
    total degree cap is exact reduction mod m^cap."""
    from itertools import combinations_with_replacement
    monos = []
    for total in range(cap):
        for combo in combinations_with_replacement(range(len(variables)), total):
            exps = [0] * len(variables)
            for c in combo:
                exps[c] += 1
            monos.append(tuple(exps))
    mono_index = {m: k for k, m in enumerate(monos)}
    rows = []
    for g in gens:
        if g.is_zero():
            continue
        idx = [variables.index(v) for v in g.variables]
        for shift in monos:
            row = [F.zero] * len(monos)
            nonzero = False
            for exps, c in g.terms.items():
                key = list(shift)
                for pos, e in zip(idx, exps):
                    key[pos] += e
                if sum(key) >= cap:
                    continue
                k = mono_index[tuple(key)]
                row[k] = F.add(row[k], c)
                nonzero = True
            if nonzero:
                rows.append(row)
    rank = _rank_ff(F, rows, len(monos))
    return len(monos) - rank


def _rank_ff(F: FiniteField, rows: List[List], ncols: int) -> int:
    mat = [r[:] for r in rows]
    rank = 0
    col = 0
    nrows = len(mat)
    while col < ncols and rank < nrows:
        sel = next((i for i in range(rank, nrows)
                    if not F.is_zero(mat[i][col])), None)
        if sel is None:
            col += 1
            continue
        mat[rank], mat[sel] = mat[sel], mat[rank]
        inv = F.inv(mat[rank][col])
        piv = [F.mul(x, inv) for x in mat[rank]]
        mat[rank] = piv
        for i in range(nrows):
            if i != rank and not F.is_zero(mat[i][col]):
                f = mat[i][col]
                mat[i] = [F.sub(a, F.mul(f, b)) for a, b in zip(mat[i], piv)]
        rank += 1
        col += 1
    return rank
