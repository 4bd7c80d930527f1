"""Chart-based arithmetic surfaces.

A surface is an atlas of affine charts.  Each chart is a hypersurface
inside a regular ambient: ambient variables, ambient relations (n - 2 of
them for n variables), and a single model generator.  Charts created by
blowups remember their parent, the blowup centre, and coordinate maps:

  * to_parent: polynomial expressions of the parent variables in ours
    (the blowdown morphism: always defined),
  * from_parent: rational expressions of our variables in the parent's
    (the inverse, undefined along the exceptional locus),
  * sibling maps: rational expressions of a sibling chart's variables in
    ours.

Blown-up charts stay in the structure as inactive scaffolding so that
points can be transported through them; the active charts form the atlas.
ClosedPoint carries a maximal ideal in the spec shape (pi, u(prim), one
linear-in-the-remaining-variables lift per extra variable).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..algebra.finitefield import (FFElem, FiniteField, factor_univariate,
                                   poly_eval, poly_from_ints, roots)
from ..algebra.poly import PadicPoly
from ..errors import DegreeBoundExceeded, UnsupportedGeometry

RationalMap = Dict[str, Tuple[PadicPoly, PadicPoly]]   # var -> (num, den)


def eval_mod_p(poly: PadicPoly, F: FiniteField, point: Dict[str, FFElem]) -> FFElem:
    """Evaluate a truncated polynomial mod p at a point with F-coordinates."""
    total = F.zero
    for exps, c in poly.terms.items():
        term = F.from_int(c)
        for name, e in zip(poly.variables, exps):
            if e:
                term = F.mul(term, F.pow(point[name], e))
        total = F.add(total, term)
    return total


def eval_rational(pair: Tuple[PadicPoly, PadicPoly], F: FiniteField,
                  point: Dict[str, FFElem]) -> Optional[FFElem]:
    num, den = pair
    d = eval_mod_p(den, F, point)
    if F.is_zero(d):
        return None
    return F.mul(eval_mod_p(num, F, point), F.inv(d))


@dataclass(frozen=True)
class ClosedPoint:
    """A closed point of a chart's special fibre.

    Maximal ideal: (pi, u(prim), var - c_var(prim) for the other chart
    variables); u is monic irreducible mod p of degree = residue degree.
    Coefficient tuples are little-endian ints mod p.
    """

    chart_id: int
    prim: str
    min_poly: Tuple[int, ...]
    coords: Tuple[Tuple[str, Tuple[int, ...]], ...]   # sorted by var name

    @property
    def degree(self) -> int:
        return len(self.min_poly) - 1

    def coord_dict(self) -> Dict[str, Tuple[int, ...]]:
        return dict(self.coords)

    def residue_field(self, p: int) -> FiniteField:
        return FiniteField(p, self.degree, modulus=self.min_poly)

    def ff_coords(self, p: int) -> Tuple[FiniteField, Dict[str, FFElem]]:
        """Coordinates in the residue field presented as F_p[z]/(u)."""
        F = self.residue_field(p)
        z = F.gen() if self.degree > 1 else F.from_int((-self.min_poly[0]) % p)
        out = {}
        for var, cs in self.coords:
            val = F.zero
            for i, c in enumerate(cs):
                val = F.add(val, F.mul(F.from_int(c), F.pow(z, i)))
            out[var] = val
        return F, out

    def ideal_generators(self, p: int, precision: int) -> List[PadicPoly]:
        """pi, u(prim), and the linear lifts, as truncated polynomials."""
        gens = [PadicPoly.constant(p, p, precision)]
        gens.append(PadicPoly.from_univariate(list(self.min_poly), self.prim,
                                              p, precision))
        for var, cs in self.coords:
            if var == self.prim:
                continue
            cpoly = PadicPoly.from_univariate(list(cs), self.prim, p, precision)
            gens.append(PadicPoly.var(var, p, precision) - cpoly)
        return gens

    def sort_key(self):
        return (self.chart_id, self.degree, self.min_poly, self.coords)


def closed_point_from_ff(chart_id: int, p: int, point: Dict[str, FFElem],
                         F: FiniteField) -> ClosedPoint:
    """Build the polynomial presentation of the closed point through an
    F_q-coordinate tuple; the primitive variable is the first (in name
    order) whose value generates the field containing all coordinates."""
    names = sorted(point)
    for prim in names + [None]:
        if prim is None:
            raise DegreeBoundExceeded(
                "no single coordinate generates the residue field of the point")
        xi = point[prim]
        # minimal polynomial of xi via its Frobenius orbit
        orbit = [xi]
        while True:
            nxt = F.frobenius(orbit[-1])
            if nxt == xi:
                break
            orbit.append(nxt)
        e = len(orbit)
        sub = FiniteField(p, e) if e != F.deg else F
        # u(t) = prod over the orbit of (t - conjugate)
        u = [F.one]
        for c in orbit:
            u = [F.sub(a, F.mul(b, c)) for a, b in
                 zip([F.zero] + u, u + [F.zero])]
        u_int = []
        in_prime_field = True
        for c in u:
            if any(c[i] for i in range(1, F.deg)):
                in_prime_field = False
                break
            u_int.append(c[0])
        if not in_prime_field:
            continue
        # express every coordinate as a polynomial in xi of degree < e
        pows = [F.one]
        for _ in range(e - 1):
            pows.append(F.mul(pows[-1], xi))
        coords = []
        solvable = True
        for var in names:
            val = point[var]
            combo = _solve_in_span(F, pows, val)
            if combo is None:
                solvable = False
                break
            coords.append((var, tuple(combo)))
        if solvable:
            return ClosedPoint(chart_id, prim, tuple(u_int), tuple(coords))
    raise DegreeBoundExceeded("unreachable")


def _solve_in_span(F: FiniteField, basis: List[FFElem], target: FFElem):
    """Solve sum a_i basis_i = target with a_i in F_p, by F_p-linear algebra."""
    p, d = F.p, F.deg
    cols = [list(b) for b in basis]
    rhs = list(target)
    rows = d
    mat = [[cols[j][i] for j in range(len(basis))] + [rhs[i]] for i in range(rows)]
    ncols = len(basis)
    pivots = []
    r = 0
    for c in range(ncols):
        sel = next((i for i in range(r, rows) if mat[i][c] % p), None)
        if sel is None:
            continue
        mat[r], mat[sel] = mat[sel], mat[r]
        inv = pow(mat[r][c], -1, p)
        mat[r] = [(x * inv) % p for x in mat[r]]
        for i in range(rows):
            if i != r and mat[i][c] % p:
                f = mat[i][c]
                mat[i] = [(a - f * b) % p for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
    for i in range(r, rows):
        if mat[i][ncols] % p:
            return None
    sol = [0] * ncols
    for i, c in enumerate(pivots):
        sol[c] = mat[i][ncols]
    return sol


@dataclass(frozen=True)
class CurveMarker:
    """A curve on a chart's special fibre, as the mod-p generators of its
    closure ideal (integer coefficients, precision-1 polynomials)."""

    chart_id: int
    gens: Tuple[PadicPoly, ...]

    def contains(self, F: FiniteField, point: Dict[str, FFElem]) -> bool:
        for g in self.gens:
            if not F.is_zero(eval_mod_p(g, F, point)):
                return False
        return True

    def sort_key(self):
        return (self.chart_id, tuple(g.canonical_key() for g in self.gens))


@dataclass
class Chart:
    chart_id: int
    p: int
    precision: int
    variables: Tuple[str, ...]
    relations: Tuple[PadicPoly, ...]
    generator: PadicPoly
    exceptional: Tuple[Tuple[str, PadicPoly], ...] = ()
    parent_id: Optional[int] = None
    family: Optional[int] = None
    centre_in_parent: Optional[object] = None      # ClosedPoint or CurveMarker
    to_parent: Dict[str, PadicPoly] = field(default_factory=dict)
    from_parent: RationalMap = field(default_factory=dict)
    sibling_maps: Dict[int, RationalMap] = field(default_factory=dict)
    root_id: int = 0
    excluded: List[ClosedPoint] = field(default_factory=list)
    excluded_curves: List[CurveMarker] = field(default_factory=list)
    active: bool = True

    def pi_expression(self) -> Optional[PadicPoly]:
        """E with E - pi among the relations, if one exists."""
        for rel in self.relations:
            cand = rel + PadicPoly.constant(self.p, self.p, self.precision)
            zero_key = (0,) * len(cand.variables)
            if not cand.is_zero() and cand.terms.get(zero_key, 0) == 0:
                return cand
        return None

    def on_fibre(self, F: FiniteField, point: Dict[str, FFElem]) -> bool:
        for rel in self.relations:
            if not F.is_zero(eval_mod_p(rel, F, point)):
                return False
        return F.is_zero(eval_mod_p(self.generator, F, point))

    def is_excluded(self, F: FiniteField, point: Dict[str, FFElem]) -> bool:
        if any(_matches(cp, F, point, self.p) for cp in self.excluded):
            return True
        return any(cm.contains(F, point) for cm in self.excluded_curves)


def _matches(cp: ClosedPoint, F: FiniteField, point: Dict[str, FFElem], p: int) -> bool:
    """Does the F-point lie in the closed point's Galois orbit?"""
    u = poly_from_ints(F, list(cp.min_poly))
    prim_val = point.get(cp.prim)
    if prim_val is None:
        return False
    if not F.is_zero(poly_eval(F, u, prim_val)):
        return False
    for var, cs in cp.coords:
        expect = poly_eval(F, poly_from_ints(F, list(cs)), prim_val)
        if point.get(var) != expect:
            return False
    return True


class Surface:
    """A glued model: all charts ever created, the active ones forming the
    atlas, plus the gluing between the two root charts."""

    def __init__(self, p: int, precision: int):
        self.p = p
        self.precision = precision
        self.charts: Dict[int, Chart] = {}
        self.root_gluing: Dict[Tuple[int, int], RationalMap] = {}
        self._next_chart = 0
        self._next_family = 0
        # False when a curve-centre blowup left parts of the exceptional
        # locus outside the atlas (point enumeration is then unavailable)
        self.atlas_complete = True

    # -- construction --------------------------------------------------------

    def add_chart(self, chart: Chart) -> Chart:
        self.charts[chart.chart_id] = chart
        return chart

    def new_chart_id(self) -> int:
        cid = self._next_chart
        self._next_chart += 1
        return cid

    def new_family_id(self) -> int:
        fid = self._next_family
        self._next_family += 1
        return fid

    def active_charts(self) -> List[Chart]:
        return [c for _, c in sorted(self.charts.items()) if c.active]

    def copy(self) -> "Surface":
        import copy as _copy
        return _copy.deepcopy(self)

    # -- point transport --------------------------------------------------------

    def _chain(self, cid: int) -> List[int]:
        out = [cid]
        while self.charts[out[-1]].parent_id is not None:
            out.append(self.charts[out[-1]].parent_id)
        return list(reversed(out))           # root first

    def push_to_parent(self, cid: int, F: FiniteField,
                       pt: Dict[str, FFElem]) -> Dict[str, FFElem]:
        chart = self.charts[cid]
        return {v: eval_mod_p(expr, F, pt) for v, expr in chart.to_parent.items()}

    def transport(self, cid_from: int, pt: Dict[str, FFElem], F: FiniteField,
                  cid_to: int) -> Optional[Dict[str, FFElem]]:
        """Coordinates of the point on another chart, or None if invisible."""
        if cid_from == cid_to:
            return dict(pt)
        chain_a = self._chain(cid_from)
        chain_b = self._chain(cid_to)
        # coordinates along the from-side chain, deepest last
        coords_a: Dict[int, Dict[str, FFElem]] = {cid_from: dict(pt)}
        cur_id, cur = cid_from, dict(pt)
        for anc in reversed(chain_a[:-1]):
            cur = self.push_to_parent(cur_id, F, cur)
            cur_id = anc
            coords_a[anc] = cur
        if chain_a[0] != chain_b[0]:
            glue = self.root_gluing.get((chain_a[0], chain_b[0]))
            if glue is None:
                return None
            imgs = {}
            for v, pair in glue.items():
                val = eval_rational(pair, F, coords_a[chain_a[0]])
                if val is None:
                    return None
                imgs[v] = val
            coords_a = {chain_b[0]: imgs}
        # deepest chart on B's chain that we have coordinates for
        idx = max(i for i, b in enumerate(chain_b) if b in coords_a)
        cur = coords_a[chain_b[idx]]
        for j in range(idx + 1, len(chain_b)):
            child = self.charts[chain_b[j]]
            crossed = None
            for aid, acoords in coords_a.items():
                achart = self.charts[aid]
                if achart.family is not None and achart.family == child.family \
                        and aid != child.chart_id:
                    smap = achart.sibling_maps.get(child.chart_id)
                    if smap is not None:
                        crossed = {}
                        for v, pair in smap.items():
                            val = eval_rational(pair, F, acoords)
                            if val is None:
                                crossed = None
                                break
                            crossed[v] = val
                        break
            if crossed is not None:
                cur = crossed
            else:
                nxt = {}
                for v, pair in child.from_parent.items():
                    val = eval_rational(pair, F, cur)
                    if val is None:
                        return None
                    nxt[v] = val
                cur = nxt
            coords_a[child.chart_id] = cur
        return cur

    # -- canonical keys ------------------------------------------------------------

    def canonical_point_key(self, cid: int, pt: Dict[str, FFElem], F: FiniteField):
        """A key identifying the underlying point of the glued surface.

        Equal points seen from different charts get equal keys; the key also
        fixes a deterministic total order used by the resolution driver.
        """
        chart = self.charts[cid]
        if chart.family is not None:
            members = sorted(c.chart_id for c in self.charts.values()
                             if c.family == chart.family)
            best = None
            for sid in members:
                if sid == cid:
                    best = (sid, dict(pt))
                    break
                smap = chart.sibling_maps.get(sid)
                if smap is None:
                    continue
                cand = {}
                good = True
                for v, pair in smap.items():
                    val = eval_rational(pair, F, pt)
                    if val is None:
                        good = False
                        break
                    cand[v] = val
                if good:
                    best = (sid, cand)
                    break
            assert best is not None
            sid, coords = best
            schart = self.charts[sid]
            parent_pt = self.push_to_parent(sid, F, coords)
            centre = schart.centre_in_parent
            if centre is not None and _centre_matches(centre, F, parent_pt, self.p):
                return ("exc", schart.family, sid, _freeze(coords))
            return self.canonical_point_key(schart.parent_id, parent_pt, F)
        # root chart: prefer the lowest root id where the point is visible
        for (a, b), glue in sorted(self.root_gluing.items()):
            if a == cid and b < cid:
                imgs = {}
                ok = True
                for v, pair in glue.items():
                    val = eval_rational(pair, F, pt)
                    if val is None:
                        ok = False
                        break
                    imgs[v] = val
                if ok:
                    return ("root", b, _freeze(imgs))
        return ("root", cid, _freeze(pt))


def _centre_matches(centre, F: FiniteField, point: Dict[str, FFElem], p: int) -> bool:
    if isinstance(centre, CurveMarker):
        return centre.contains(F, point)
    return _matches(centre, F, point, p)


def _freeze(pt: Dict[str, FFElem]):
    return tuple(sorted(pt.items()))


def canonical_closed_point_key(surface: Surface, cp: ClosedPoint):
    """Galois-orbit-invariant key for a closed point: the lexicographically
    smallest canonical key among its conjugate F_{p^e}-representatives,
    embedded into the canonical field of its degree."""
    p = surface.p
    F_own, coords = cp.ff_coords(p)
    F_canon = FiniteField(p, cp.degree)
    if cp.degree == 1:
        pts = [coords]
        Fc = F_own
    else:
        phi = _modulus_embedding(F_own, F_canon)
        base = {v: phi(val) for v, val in coords.items()}
        pts = []
        cur = base
        for _ in range(cp.degree):
            pts.append(cur)
            cur = {v: F_canon.frobenius(val) for v, val in cur.items()}
        Fc = F_canon
    keys = [surface.canonical_point_key(cp.chart_id, q, Fc) for q in pts]
    return min(keys)


def _modulus_embedding(F_own: FiniteField, F_canon: FiniteField):
    """Map F_p[z]/(u) -> canonical F_{p^e} sending z to the first root of u."""
    u = poly_from_ints(F_canon, list(F_own.modulus))
    rts = roots(F_canon, u)
    root = rts[0]
    pows = [F_canon.one]
    for _ in range(F_own.deg - 1):
        pows.append(F_canon.mul(pows[-1], root))

    def phi(a: FFElem) -> FFElem:
        out = F_canon.zero
        for c, pw in zip(a, pows):
            if c:
                out = F_canon.add(out, F_canon.mul(F_canon.from_int(c), pw))
        return out

    return phi


# ---------------------------------------------------------------------------
# the standard two-chart hyperelliptic model
# ---------------------------------------------------------------------------

def hyperelliptic_surface(f_coeffs: List[int], p: int, precision: int,
                          genus: int | None = None) -> Surface:
    """y^2 = f(x) glued with v^2 = u^{2g+2} f(1/u) along u = 1/x, v = y/x^{g+1}."""
    if p == 2:
        raise UnsupportedGeometry("residue characteristic 2 is not supported")
    deg = len(f_coeffs) - 1
    if deg < 3:
        raise UnsupportedGeometry("need deg f >= 3")
    g = genus if genus is not None else (deg - 1 - (deg % 2 == 0)) // 2
    surf = Surface(p, precision)
    x = PadicPoly.var("x", p, precision)
    y = PadicPoly.var("y", p, precision)
    fx = PadicPoly.from_univariate(f_coeffs, "x", p, precision)
    c0 = Chart(chart_id=surf.new_chart_id(), p=p, precision=precision,
               variables=("x", "y"), relations=(), generator=y * y - fx,
               root_id=0)
    # second chart: v^2 = u^{2g+2} f(1/u) = sum f_i u^{2g+2-i}
    u = PadicPoly.var("u", p, precision)
    v = PadicPoly.var("v", p, precision)
    fu = PadicPoly.zero(p, precision)
    for i, c in enumerate(f_coeffs):
        fu = fu + PadicPoly.constant(c, p, precision) * u**(2 * g + 2 - i)
    c1 = Chart(chart_id=surf.new_chart_id(), p=p, precision=precision,
               variables=("u", "v"), relations=(), generator=v * v - fu,
               root_id=1)
    surf.add_chart(c0)
    surf.add_chart(c1)
    one = PadicPoly.constant(1, p, precision)
    xg = x**(g + 1)
    ug = u**(g + 1)
    surf.root_gluing[(0, 1)] = {"u": (one, x), "v": (y, xg)}
    surf.root_gluing[(1, 0)] = {"x": (one, u), "y": (v, ug)}
    return surf
