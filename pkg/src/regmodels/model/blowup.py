"""Point blowups of chart surfaces with strict transforms.

Blowing up a closed point replaces its owning chart by one chart per
generator h_i of the point's maximal ideal.  On the h_i-chart the other
generators become h_j = h_i T_j; generators linear in a chart variable are
eliminated by substitution, the rest stay as ambient relations.  The model
generator is transported and divided exactly by the maximal power of h_i
(weak transform = strict transform for a principal ideal).  Charts where
the transform becomes a unit are dropped.  Other charts that can see the
centre keep their coordinates but record the centre as excluded.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Tuple

from ..algebra.finitefield import FiniteField
from ..algebra.poly import PadicPoly
from ..errors import (PointNotOnModel, PrecisionExhausted,
                      UnsupportedGeometry)
from .branches import fibre_branches
from .chart import (Chart, ClosedPoint, CurveMarker, Surface,
                    closed_point_from_ff, eval_mod_p)


def _generator_list(chart: Chart, centre: ClosedPoint,
                    p: int, M: int) -> List[Tuple[str, PadicPoly]]:
    """Generators of the centre's maximal ideal in the ambient, labelled.

    pi is dropped when an ambient relation expresses pi as a p-free
    polynomial vanishing at the centre (pi is then redundant)."""
    gens = centre.ideal_generators(p, M)
    labels = ["pi", "prim"] + [v for v, _ in centre.coords if v != centre.prim]
    pi_expr = chart.pi_expression()
    if pi_expr is not None and pi_expr.min_coeff_valuation() == 0:
        gens = gens[1:]
        labels = labels[1:]
    return list(zip(labels, gens))


def _elimination_var(h: PadicPoly, prim: Optional[str]) -> Optional[str]:
    """Variable eliminable through h (degree 1, unit constant coefficient);
    prefers a non-primitive variable."""
    candidates = []
    for var in h.variables:
        coeffs = h.as_univariate(var)
        if len(coeffs) == 2 and coeffs[1].is_constant() \
                and coeffs[1].constant_value().is_unit():
            candidates.append(var)
    if not candidates:
        return None
    non_prim = [v for v in candidates if v != prim]
    return (non_prim or candidates)[0]


def blowup(surface: Surface, centre: ClosedPoint) -> Surface:
    surf = surface.copy()
    p, M = surf.p, surf.precision
    owner = surf.charts[centre.chart_id]
    if not owner.active:
        raise ValueError("centre lives on an inactive chart")
    F, coords = centre.ff_coords(p)
    for g in list(owner.relations) + [owner.generator]:
        if not F.is_zero(eval_mod_p(g, F, coords)):
            raise PointNotOnModel("blowup centre is not on the model")

    labelled = _generator_list(owner, centre, p, M)
    fid = surf.new_family_id()
    built: Dict[int, dict] = {}
    for idx in range(len(labelled)):
        data = _build_chart(surf, owner, centre, labelled, idx, fid)
        if data is not None:
            built[idx] = data
    if not built:
        raise UnsupportedGeometry("all blowup charts degenerated")
    ids = {idx: surf.new_chart_id() for idx in sorted(built)}
    for idx, cid in ids.items():
        data = built[idx]
        sibling_maps: Dict[int, Dict[str, Tuple[PadicPoly, PadicPoly]]] = {}
        for jdx, sid in ids.items():
            if jdx == idx:
                continue
            sib = built[jdx]
            smap: Dict[str, Tuple[PadicPoly, PadicPoly]] = {}
            den = data["ratio"][jdx]
            for var in sib["variables"]:
                if var in sib["tindex"]:
                    a = sib["tindex"][var]
                    smap[var] = (data["ratio"][a], den)
                else:
                    smap[var] = (data["to_parent"][var],
                                 PadicPoly.constant(1, p, M))
            sibling_maps[sid] = smap
        chart = Chart(
            chart_id=cid, p=p, precision=M,
            variables=data["variables"], relations=data["relations"],
            generator=data["generator"], exceptional=data["exceptional"],
            parent_id=owner.chart_id, family=fid, centre_in_parent=centre,
            to_parent=data["to_parent"], from_parent=data["from_parent"],
            sibling_maps=sibling_maps, root_id=owner.root_id)
        surf.add_chart(chart)
    owner_id = owner.chart_id
    surf.charts[owner_id].active = False
    for chart in surf.active_charts():
        if chart.family == fid:
            continue
        img = surf.transport(owner_id, coords, F, chart.chart_id)
        if img is None or not chart.on_fibre(F, img):
            continue
        try:
            cp = closed_point_from_ff(chart.chart_id, p, img, F)
        except Exception:
            continue
        if not any(cp == old for old in chart.excluded):
            chart.excluded.append(cp)
    return surf


def _build_chart(surf: Surface, owner: Chart, centre: ClosedPoint,
                 labelled, idx: int, fid: int) -> Optional[dict]:
    return _build_chart_core(surf, owner, centre.prim, labelled, idx, fid)


def _build_chart_core(surf: Surface, owner: Chart, prim: Optional[str],
                      labelled, idx: int, fid: int) -> Optional[dict]:
    p, M = surf.p, surf.precision
    _, h_i = labelled[idx]

    subs: Dict[str, PadicPoly] = {}
    new_vars: List[str] = []
    tindex: Dict[str, int] = {}
    from_parent: Dict[str, Tuple[PadicPoly, PadicPoly]] = {}
    # handle the primitive-variable generator first so lifts close quickly
    order = sorted((j for j in range(len(labelled)) if j != idx),
                   key=lambda j: (labelled[j][0] != "prim", j))
    for j in order:
        _, h_j = labelled[j]
        tname = f"t{fid}_{j}"
        new_vars.append(tname)
        tindex[tname] = j
        from_parent[tname] = (h_j, h_i)
        elim = _elimination_var(h_j, prim)
        if elim is not None:
            lc = h_j.as_univariate(elim)[1].constant_value()
            rest = h_j - PadicPoly.var(elim, p, M) * lc.residue
            t = PadicPoly.var(tname, p, M)
            subs[elim] = (h_i * t - rest).map_coefficients(
                lambda c: c * lc.inverse().residue)

    def close(poly: PadicPoly) -> PadicPoly:
        for _ in range(len(subs) + 2):
            present = [v for v in poly.variables
                       if v in subs and poly.degree(v) > 0]
            if not present:
                return poly
            poly = poly.substitute(subs)
        raise UnsupportedGeometry("substitution chain did not close")

    subs = {v: close(e) for v, e in subs.items()}
    kept = [v for v in owner.variables if v not in subs]
    variables = tuple(sorted(kept + new_vars))

    to_parent: Dict[str, PadicPoly] = {}
    for v in owner.variables:
        to_parent[v] = subs.get(v, PadicPoly.var(v, p, M))
    for v in kept:
        from_parent[v] = (PadicPoly.var(v, p, M), PadicPoly.constant(1, p, M))

    h_i_new = close(h_i)

    relations = [close(r) for r in owner.relations]
    for j in order:
        _, h_j = labelled[j]
        if _elimination_var(h_j, prim) is None:
            tname = f"t{fid}_{j}"
            relations.append(h_i_new * PadicPoly.var(tname, p, M) - close(h_j))
    relations = tuple(r for r in relations if not r.is_zero())

    gen = close(owner.generator)
    gen, _e = _strict_transform_divide(gen, h_i_new, relations, p, M)
    if _is_unit_poly(gen):
        return None

    exceptional = tuple((lbl, close(poly)) for lbl, poly in owner.exceptional)
    exceptional += ((f"E{fid}", h_i_new),)

    # sanity: the new fibre must stay one-dimensional on every branch
    probe = Chart(chart_id=-1, p=p, precision=M, variables=variables,
                  relations=relations, generator=gen)
    fibre_branches(probe, FiniteField(p, 1))

    ratio: Dict[int, PadicPoly] = {}
    for j in range(len(labelled)):
        ratio[j] = (PadicPoly.constant(1, p, M) if j == idx
                    else PadicPoly.var(f"t{fid}_{j}", p, M))

    return {
        "variables": variables, "relations": relations, "generator": gen,
        "exceptional": exceptional, "to_parent": to_parent,
        "from_parent": from_parent, "ratio": ratio, "tindex": tindex,
    }


def strict_transform_exponent(gen: PadicPoly, h: PadicPoly, relations,
                              p: int, M: int) -> int:
    """The exponent e with gen = h^e * (strict transform); exposed for tests."""
    return _strict_transform_divide(gen, h, relations, p, M)[1]


def _strict_transform_divide(gen: PadicPoly, h: PadicPoly,
                             relations, p: int, M: int):
    """Divide gen by the maximal power of h.

    Divisibility can hide behind the ambient relation pi = E: the division
    remainder, when p-divisible, is rewritten through E before retrying
    (exact ideal identity; the representative division by p^v costs v digits
    of precision, which propagates through the min-precision semantics)."""
    pi_expr = None
    for rel in relations:
        cand = rel + PadicPoly.constant(p, p, M)
        zero_key = (0,) * len(cand.variables)
        if not cand.is_zero() and cand.terms.get(zero_key, 0) == 0 \
                and cand.min_coeff_valuation() == 0:
            pi_expr = cand
            break
    e = 0
    cur = gen
    if h.is_constant():
        val = h.constant_value()
        if val.residue != p:
            raise UnsupportedGeometry("constant exceptional equation other than pi")
        while True:
            v = cur.min_coeff_valuation()
            if v is None:
                raise PrecisionExhausted(
                    "strict transform vanished at the precision cap")
            if v < 1:
                break
            cur = cur.divide_by_pi_power(1)
            e += 1
        return cur, e
    main = [v for v in h.variables if h.degree(v) > 0]
    if len(main) != 1:
        raise UnsupportedGeometry("exceptional equation involves several variables")
    main = main[0]
    while True:
        try:
            q, r = cur.div_rem(h, main)
        except (ValueError, ArithmeticError, PrecisionExhausted):
            break
        if r.is_zero():
            cur = q
            e += 1
            continue
        v = r.min_coeff_valuation()
        if v is None:
            raise PrecisionExhausted(
                "strict transform divisibility undecidable at the cap")
        if v < 1 or pi_expr is None:
            break
        rewritten = r.divide_by_pi_power(v) * pi_expr**v
        cur2 = h * q + rewritten
        q2, r2 = cur2.div_rem(h, main)
        if not r2.is_zero():
            break
        cur = q2
        e += 1
    if cur.is_zero():
        raise UnsupportedGeometry("strict transform vanished: model not flat here")
    return cur, e


def _is_unit_poly(gen: PadicPoly) -> bool:
    try:
        gen.inverse_unit()
        return True
    except Exception:
        return False


# ---------------------------------------------------------------------------
# curve-centre blowups
# ---------------------------------------------------------------------------


def curve_marker_for_piece(chart: Chart, branch, equation) -> CurveMarker:
    """The closure-ideal marker of a fibre curve given by a branch piece."""
    from .mpoly import MPoly
    gens = [_mpoly_to_padic(MPoly.from_bipoly(equation), chart.p)]
    for var, (num, den) in branch.subs.items():
        if num.is_zero():
            gens.append(PadicPoly.var(var, chart.p, 1))
        else:
            cleared = MPoly.var(var, branch.field) * den - num
            gens.append(_mpoly_to_padic(cleared, chart.p))
    gens.sort(key=lambda g: g.canonical_key())
    return CurveMarker(chart.chart_id, tuple(gens))


def _mpoly_to_padic(m, p: int) -> PadicPoly:
    terms = {}
    for exps, c in m.terms.items():
        terms[exps] = c[0] % p
    return PadicPoly(p, 1, m.variables, terms)


def _marker_pieces_match(chart: Chart, branch, g, marker: CurveMarker) -> bool:
    """Does the (branch, g) piece lie inside the marker's curve?"""
    from ..algebra.bivariate import bi_exact_div
    from .mpoly import MPoly
    s, t = branch.free_vars
    for mg in marker.gens:
        cur = MPoly.from_padic(mg, branch.field)
        for var, (num, den) in branch.subs.items():
            cur, _ = cur.substitute_cleared(var, num, den)
        leftover = [v for v in cur.vars_present() if v not in (s, t)]
        if leftover:
            return False
        bi = cur.to_bipoly(s, t)
        if bi.is_zero():
            continue
        while True:
            q = bi_exact_div(bi, g)
            if q is None:
                break
            bi = q
        # strip branch artifacts as well
        for a in branch.artifacts:
            if a.is_constant() or a.is_zero():
                continue
            while True:
                q = bi_exact_div(bi, a)
                if q is None:
                    break
                bi = q
        if not (bi.is_zero() or _vanishes_mod(bi, g)):
            return False
    return True


def _vanishes_mod(h, g) -> bool:
    from ..algebra.bivariate import bi_divmod, RationalFunctionField, poly_trim
    K = RationalFunctionField(h.F)
    _, r = bi_divmod(h, g)
    return not poly_trim(K, r)


def _curve_samples(chart: Chart, branch, equation, p: int, want: int = 24):
    """A few points on the curve piece, over small extensions."""
    from ..algebra.finitefield import FiniteField, roots
    from .mpoly import MPoly
    out = []
    for j in range(1, 4):
        big = FiniteField(p, branch.field.deg * j)
        phi = (lambda c: c) if j == 1 else branch.field.embed_into(big)
        eq = equation if j == 1 else equation.map_into(big, phi)
        subs = {v: (MPoly(big, n.variables, {k: phi(c) for k, c in n.terms.items()}),
                    MPoly(big, d.variables, {k: phi(c) for k, c in d.terms.items()}))
                for v, (n, d) in branch.subs.items()}
        from .branches import FibreBranch
        lifted = FibreBranch(chart.chart_id, big, branch.free_vars, subs, eq)
        for sval in big.elements():
            uni = eq.eval_x(sval)
            if not uni:
                continue
            for tval in roots(big, uni):
                pt = lifted.full_point(sval, tval)
                if pt is not None:
                    out.append((big, pt))
                    if len(out) >= want:
                        return out
    return out


def blowup_curve(surface: Surface, marker: CurveMarker) -> Surface:
    """Blow up along a fibre curve (regular irreducible centre).

    Only the owning chart is blown up; other charts that see the curve mark
    it as excluded, and the atlas is flagged incomplete when that happens
    (the exceptional locus over those parts is not charted)."""
    from ..algebra.bivariate import factor_bivariate
    from .branches import fibre_branches
    from ..algebra.finitefield import FiniteField
    surf = surface.copy()
    p, M = surf.p, surf.precision
    owner = surf.charts[marker.chart_id]
    if not owner.active:
        raise ValueError("curve centre lives on an inactive chart")
    from ..model.regularity import _strip_artifacts
    base = FiniteField(p, 1)
    located = None
    for branch in fibre_branches(owner, base):
        eq = _strip_artifacts(branch.equation, branch)
        if eq.is_constant():
            continue
        for g, _m in factor_bivariate(eq):
            cand = curve_marker_for_piece(owner, branch, g)
            if cand.gens == marker.gens:
                located = (branch, g)
                break
        if located:
            break
    if located is None:
        raise UnsupportedGeometry("curve centre not found on its chart")
    branch, g = located

    labelled = []
    pi_expr = owner.pi_expression()
    if pi_expr is None or pi_expr.min_coeff_valuation() != 0:
        labelled.append(("pi", PadicPoly.constant(p, p, M)))
    for k, mg in enumerate(marker.gens):
        # canonical integer lift of the mod-p generator to full precision
        labelled.append((f"c{k}", PadicPoly(p, M, mg.variables, dict(mg.terms))))

    fid = surf.new_family_id()
    built = {}
    for idx in range(len(labelled)):
        data = _build_chart_core(surf, owner, None, labelled, idx, fid)
        if data is not None:
            built[idx] = data
    if not built:
        raise UnsupportedGeometry("all curve-blowup charts degenerated")
    ids = {idx: surf.new_chart_id() for idx in sorted(built)}
    for idx, cid in ids.items():
        data = built[idx]
        sibling_maps = {}
        for jdx, sid in ids.items():
            if jdx == idx:
                continue
            sib = built[jdx]
            smap = {}
            den = data["ratio"][jdx]
            for var in sib["variables"]:
                if var in sib["tindex"]:
                    a = sib["tindex"][var]
                    smap[var] = (data["ratio"][a], den)
                else:
                    smap[var] = (data["to_parent"][var],
                                 PadicPoly.constant(1, p, M))
            sibling_maps[sid] = smap
        chart = Chart(
            chart_id=cid, p=p, precision=M,
            variables=data["variables"], relations=data["relations"],
            generator=data["generator"], exceptional=data["exceptional"],
            parent_id=owner.chart_id, family=fid, centre_in_parent=marker,
            to_parent=data["to_parent"], from_parent=data["from_parent"],
            sibling_maps=sibling_maps, root_id=owner.root_id)
        surf.add_chart(chart)
    owner_id = owner.chart_id
    surf.charts[owner_id].active = False

    # other charts seeing parts of the curve: mark excluded curve pieces
    samples = _curve_samples(owner, branch, g, p)
    for chart in surf.active_charts():
        if chart.family == fid:
            continue
        landed = []
        for big, pt in samples:
            img = surf.transport(owner_id, pt, big, chart.chart_id)
            if img is not None and chart.on_fibre(big, img):
                landed.append((big, img))
        if not landed:
            continue
        # locate the piece of the curve on this chart
        found = None
        for cbranch in fibre_branches(chart, base):
            from ..model.regularity import _strip_artifacts
            eq = _strip_artifacts(cbranch.equation, cbranch)
            if eq.is_constant():
                continue
            for cg, cm in factor_bivariate(eq):
                hits = sum(1 for big, img in landed
                           if _piece_contains(chart, cbranch, cg, big, img))
                if hits == len(landed) and hits > 0:
                    found = (cbranch, cg)
                    break
            if found:
                break
        if found is None:
            raise UnsupportedGeometry(
                "curve centre visible on a chart but no fibre piece matches")
        chart.excluded_curves.append(curve_marker_for_piece(chart, *found))
        surf.atlas_complete = False
    return surf


def _piece_contains(chart: Chart, branch, g, big, pt) -> bool:
    from .mpoly import MPoly
    base = branch.field
    if base.deg == big.deg:
        phi = lambda c: c
    elif big.deg % base.deg == 0:
        phi = base.embed_into(big)
    else:
        return False
    gb = g.map_into(big, phi)
    s, t = branch.free_vars
    if not big.is_zero(gb.eval_point(pt[s], pt[t])):
        return False
    for var, (num, den) in branch.subs.items():
        nb = MPoly(big, num.variables, {k: phi(c) for k, c in num.terms.items()})
        db = MPoly(big, den.variables, {k: phi(c) for k, c in den.terms.items()})
        if num.is_zero():
            if not big.is_zero(pt[var]):
                return False
            continue
        lhs = big.mul(pt[var], db.evaluate(pt))
        if lhs != nb.evaluate(pt):
            return False
    return True
