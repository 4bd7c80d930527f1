"""Regularity testing and the singular locus of the special fibre.

A chart point is regular iff dim m/(m^2 + I) = 2.  The cotangent matrix
has one row per chart equation and one column per direction: pi and the
ambient variables.  The variable columns are honest mod-p polynomials of
the point, but the pi-column is g(lift)/p, which involves base-p carries:
it is evaluated exactly (mod p^2 arithmetic at the given point) rather
than interpolated.  Candidate points come from solving the polynomial
part of the rank-drop conditions:

  * on reduced fibre pieces the variable-columns alone cut out a finite
    set (the fibre-singular locus), which is then verified pointwise;
  * along a multiple component those columns vanish identically, and the
    pi-column restricted to the component becomes polynomial after a
    carry correction, giving again a finite candidate set.
"""

from __future__ import annotations

from itertools import combinations
from typing import Dict, List, Optional, Tuple

from ..algebra.bivariate import BiPoly, bi_exact_div, factor_bivariate
from ..algebra.finitefield import (FFElem, FiniteField, factor_univariate,
                                   poly_deg, poly_from_ints, poly_gcd,
                                   poly_trim, roots)
from ..algebra.poly import PadicPoly
from ..errors import (DegreeBoundExceeded, PointNotOnModel,
                      UnsupportedGeometry)
from .branches import FibreBranch, fibre_branches
from .chart import (Chart, ClosedPoint, Surface, canonical_closed_point_key,
                    closed_point_from_ff, eval_mod_p)
from .mpoly import MPoly


class NonIsolatedLocus(UnsupportedGeometry):
    """The non-regular locus contains a whole fibre curve; carries the data
    needed to blow it up as a (regular, irreducible) curve centre."""

    def __init__(self, chart_id: int, branch: FibreBranch, equation: BiPoly):
        super().__init__(
            "non-regular locus contains a whole fibre component: a curve "
            "centre is required")
        self.chart_id = chart_id
        self.branch = branch
        self.equation = equation


# ---------------------------------------------------------------------------
# honest cotangent computation at a closed point
# ---------------------------------------------------------------------------


def _w2_context(cp: ClosedPoint, p: int):
    """Arithmetic mod p^2 in (Z/p^2)[z]/(u-lift): enough to read g(lift)/p."""
    mod = p * p
    u = [c % p for c in cp.min_poly]          # canonical integer lift
    deg = len(u) - 1

    def mul(a, b):
        prod = [0] * (2 * deg - 1) if deg > 1 else [a[0] * b[0] % mod]
        if deg > 1:
            for i, x in enumerate(a):
                if x:
                    for j, y in enumerate(b):
                        prod[i + j] = (prod[i + j] + x * y) % mod
            for k in range(len(prod) - 1, deg - 1, -1):
                c = prod[k]
                if c:
                    for j in range(deg):
                        prod[k - deg + j] = (prod[k - deg + j] - c * u[j]) % mod
                prod[k] = 0
        return tuple(x % mod for x in prod[:deg])

    def add(a, b):
        return tuple((x + y) % mod for x, y in zip(a, b))

    def from_int(n):
        return tuple([n % mod] + [0] * (deg - 1))

    z = tuple([0, 1] + [0] * (deg - 2)) if deg > 1 else from_int((-u[0]) % mod)
    lifts = {}
    for var, cs in cp.coords:
        val = from_int(0)
        zp = from_int(1)
        for c in cs:
            val = add(val, mul(from_int(c % p), zp))
            zp = mul(zp, z)
        lifts[var] = val
    return mod, deg, mul, add, from_int, lifts


def _pi_column_value(g: PadicPoly, cp: ClosedPoint, F: FiniteField,
                     p: int) -> Optional[FFElem]:
    """g(canonical lift of the point)/p as an element of the residue field;
    None if g does not vanish at the point (not on the model)."""
    mod, deg, mul, add, from_int, lifts = _w2_context(cp, p)
    total = from_int(0)
    for exps, c in g.terms.items():
        term = from_int(c)
        for name, e in zip(g.variables, exps):
            for _ in range(e):
                term = mul(term, lifts[name])
        total = add(total, term)
    if any(x % p for x in total):
        return None
    return F.from_coeffs([x // p for x in total])


def cotangent_defect(chart: Chart, point: ClosedPoint) -> int:
    """dim m/(m^2 + I) of the model's local ring at the point."""
    p = chart.p
    F, coords = point.ff_coords(p)
    gens = list(chart.relations) + [chart.generator]
    rows = []
    for g in gens:
        pival = _pi_column_value(g, point, F, p)
        if pival is None:
            raise PointNotOnModel(
                f"point is not on the model in chart {chart.chart_id}")
        row = [pival]
        for v in chart.variables:
            row.append(eval_mod_p(g.partial(v).truncate(1), F, coords))
        rows.append(row)
    rank = _ff_rank(F, rows)
    return len(chart.variables) + 1 - rank


def is_regular_at(chart: Chart, point: ClosedPoint) -> bool:
    return cotangent_defect(chart, point) == 2


def _ff_rank(F: FiniteField, mat: List[List[FFElem]]) -> int:
    mat = [row[:] for row in mat]
    rank = 0
    rows, cols = len(mat), len(mat[0]) if mat else 0
    col = 0
    while rank < rows and col < cols:
        sel = next((i for i in range(rank, rows) if not F.is_zero(mat[i][col])), None)
        if sel is None:
            col += 1
            continue
        mat[rank], mat[sel] = mat[sel], mat[rank]
        inv = F.inv(mat[rank][col])
        mat[rank] = [F.mul(x, inv) for x in mat[rank]]
        for i in range(rows):
            if i != rank and not F.is_zero(mat[i][col]):
                factor = mat[i][col]
                mat[i] = [F.sub(a, F.mul(factor, b)) for a, b in zip(mat[i], mat[rank])]
        rank += 1
        col += 1
    return rank


# ---------------------------------------------------------------------------
# candidate search
# ---------------------------------------------------------------------------


def _var_minor_polys(chart: Chart) -> List[PadicPoly]:
    """Maximal minors of the variables-only Jacobian [dg_i/dx_j] mod p."""
    gens = list(chart.relations) + [chart.generator]
    rows = [[g.partial(v).truncate(1) for v in chart.variables] for g in gens]
    m = len(rows)
    out = []
    for cols in combinations(range(len(chart.variables)), m):
        out.append(_pdet([[rows[i][j] for j in cols] for i in range(m)]))
    return out


def _pdet(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = None
    for j in range(n):
        minor = _pdet([r[:j] + r[j + 1:] for r in rows[1:]])
        term = rows[0][j] * minor
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


def _restrict_to_branch(poly: PadicPoly, branch: FibreBranch) -> BiPoly:
    m = MPoly.from_padic(poly, branch.field)
    s, t = branch.free_vars
    for var, (num, den) in branch.subs.items():
        m, _ = m.substitute_cleared(var, num, den)
    return m.to_bipoly(s, t)


def _strip_artifacts(g: BiPoly, branch: FibreBranch) -> BiPoly:
    """Remove factors supported on cleared denominators: that locus is not
    parametrized by the branch (it belongs to the degenerate branches)."""
    if g.is_zero():
        return g
    for a in branch.artifacts:
        if a.is_zero() or a.is_constant():
            continue
        while True:
            q = bi_exact_div(g, a)
            if q is None:
                break
            g = q
    return g


def _branch_constant_lifts(branch: FibreBranch) -> Optional[Dict[str, int]]:
    """Integer lifts of the substituted coordinates when they are constant
    along the branch (value 0 for num = 0); None when non-constant."""
    out = {}
    F = branch.field
    if F.deg != 1:
        return None
    for var, (num, den) in branch.subs.items():
        if num.is_zero():
            out[var] = 0
        elif num.is_constant() and den.is_constant():
            val = F.mul(num.constant_value(), F.inv(den.constant_value()))
            out[var] = val[0] % F.p
        else:
            return None
    return out


def _carry_corrected_matrix(chart: Chart, branch: FibreBranch, g: BiPoly,
                            mult: int) -> Optional[List[List[BiPoly]]]:
    """The cotangent matrix restricted to a multiple component, with the
    pi-column made polynomial by the carry correction

        gen(lift)/p  ==  pi_part(gen_res) + (lift(gen_res mod p)
                          - lift(g)^mult lift(h)) / p        (mod p, on g=0).

    Only branches whose substitutions are constants are supported; other
    shapes raise (curve centres would be needed anyway)."""
    consts = _branch_constant_lifts(branch)
    if consts is None:
        raise UnsupportedGeometry(
            "multiple fibre component on a non-constant branch parametrization")
    p, M = chart.p, chart.precision
    F = branch.field
    s, t = branch.free_vars
    subs = {v: PadicPoly.constant(c, p, M) for v, c in consts.items()}
    rows = []
    gens = list(chart.relations) + [chart.generator]
    for i, gen in enumerate(gens):
        res = gen.substitute(subs)
        resbar = _to_bipoly_modp(res, s, t, F)
        pi_part = _pi_part_poly(res)
        if i < len(gens) - 1:
            if not resbar.is_zero():
                raise UnsupportedGeometry(
                    "relation does not vanish on the branch")
            picol = _to_bipoly_modp(pi_part, s, t, F)
        else:
            # generator: resbar = g^mult * h; carry-correct
            h = resbar
            for _ in range(mult):
                q = bi_exact_div(h, g)
                if q is None:
                    raise UnsupportedGeometry(
                        "branch equation does not divide the restricted generator")
                h = q
            lift_res = _lift_bipoly(resbar, s, t, p, M)
            lift_gh = _lift_bipoly(g, s, t, p, M)**mult * _lift_bipoly(h, s, t, p, M)
            corr = (lift_res - lift_gh).divide_by_pi_power(1)
            picol = _to_bipoly_modp(pi_part + corr, s, t, F)
        row = [picol]
        for v in chart.variables:
            dv = gen.partial(v).substitute(subs) if v not in consts else \
                gen.partial(v).substitute(subs)
            row.append(_to_bipoly_modp(dv, s, t, F))
        rows.append(row)
    return rows


def _pi_part_poly(g: PadicPoly) -> PadicPoly:
    """(g - canonical lift of g mod p)/p: valid where carries are handled."""
    p = g.p
    terms = {}
    for exps, c in g.terms.items():
        d = (c - (c % p)) // p
        if d:
            terms[exps] = d
    return PadicPoly(p, max(1, g.precision - 1), g.variables, terms)


def _to_bipoly_modp(poly: PadicPoly, s: str, t: str, F: FiniteField) -> BiPoly:
    m = MPoly.from_padic(poly, F)
    extra = [v for v in m.vars_present() if v not in (s, t)]
    if extra:
        raise UnsupportedGeometry(f"stray variables {extra} in restriction")
    return m.to_bipoly(s, t)


def _lift_bipoly(g: BiPoly, s: str, t: str, p: int, M: int) -> PadicPoly:
    terms = {}
    for (i, j), c in g.terms.items():
        terms[(i, j)] = c[0] % p
    return PadicPoly(p, M, (s, t), terms)


def _bi_minors(rows: List[List[BiPoly]], ncols: int, m: int):
    out = []
    for cols in combinations(range(ncols), m):
        out.append(_bi_det([[rows[i][j] for j in cols] for i in range(m)]))
    return out


def _bi_det(rows: List[List[BiPoly]]) -> BiPoly:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = None
    for j in range(n):
        minor = _bi_det([r[:j] + r[j + 1:] for r in rows[1:]])
        term = rows[0][j] * minor
        if j % 2:
            term = term.scale(term.F.neg(term.F.one))
        total = term if total is None else total + term
    return total


def chart_singular_points(chart: Chart, degree_bound: int) -> List[ClosedPoint]:
    """Closed points of the chart fibre where the model is not regular."""
    p = chart.p
    base = FiniteField(p, 1)
    var_minors = _var_minor_polys(chart)
    found: Dict[tuple, ClosedPoint] = {}
    for branch in fibre_branches(chart, base, extension_bound=degree_bound):
        eq = _strip_artifacts(branch.equation, branch)
        if eq.is_constant():
            continue
        factors = factor_bivariate(eq)
        factors = [(g, m) for g, m in factors if not branch.spurious(g)]
        factors = [(g, m) for g, m in factors
                   if not _piece_excluded(chart, branch, g)]
        for g, m in factors:
            if m == 1:
                system = [g]
                for mp in var_minors:
                    system.append(_strip_artifacts(
                        _restrict_to_branch(mp, branch), branch))
            else:
                rows = _carry_corrected_matrix(chart, branch, g, m)
                nrows = len(rows)
                system = [g] + _bi_minors(rows, len(chart.variables) + 1, nrows)
                if all(h.is_zero() or bi_exact_div(h, g) is not None
                       for h in system):
                    raise NonIsolatedLocus(chart.chart_id, branch, g)
            for pt_field, pt in _solve_bivariate_system(system, branch.field,
                                                        degree_bound):
                _consider(chart, branch, pt_field, pt, degree_bound, found)
        # crossings involving a multiple factor are not caught by the
        # var-minors of a reduced factor on the same branch
        for i in range(len(factors)):
            for j in range(i + 1, len(factors)):
                if factors[i][1] == 1 and factors[j][1] == 1:
                    continue
                system = [factors[i][0], factors[j][0]]
                for pt_field, pt in _solve_bivariate_system(
                        system, branch.field, degree_bound):
                    _consider(chart, branch, pt_field, pt, degree_bound, found)
    return sorted(found.values(), key=lambda c: c.sort_key())


def _piece_excluded(chart: Chart, branch: FibreBranch, g: BiPoly) -> bool:
    """Whether the fibre piece lies inside a curve excluded from the chart
    (its points are charted by a later curve blowup)."""
    if not chart.excluded_curves:
        return False
    from .blowup import _marker_pieces_match
    return any(_marker_pieces_match(chart, branch, g, marker)
               for marker in chart.excluded_curves)


def _consider(chart: Chart, branch: FibreBranch, pt_field: FiniteField,
              pt: dict, degree_bound: int, found: dict):
    full = _branch_point(branch, pt_field, pt)
    if full is None:
        return
    if chart.is_excluded(pt_field, full):
        return
    cp = closed_point_from_ff(chart.chart_id, chart.p, full, pt_field)
    if cp.degree > degree_bound:
        raise DegreeBoundExceeded(
            f"singular point of degree {cp.degree} exceeds bound {degree_bound}")
    key = (cp.prim, cp.min_poly, cp.coords)
    if key in found:
        return
    if not is_regular_at(chart, cp):
        found[key] = cp


def _branch_point(branch: FibreBranch, F: FiniteField,
                  pt: Dict[str, FFElem]) -> Optional[Dict[str, FFElem]]:
    s, t = branch.free_vars
    if branch.field.deg == F.deg:
        return branch.full_point(pt[s], pt[t])
    phi = branch.field.embed_into(F)
    lifted = FibreBranch(branch.chart_id, F, branch.free_vars,
                         {v: (_lift_mp(n, F, phi), _lift_mp(d, F, phi))
                          for v, (n, d) in branch.subs.items()},
                         branch.equation.map_into(F, phi))
    return lifted.full_point(pt[s], pt[t])


def _lift_mp(m: MPoly, F: FiniteField, phi) -> MPoly:
    return MPoly(F, m.variables, {k: phi(v) for k, v in m.terms.items()})


def _solve_bivariate_system(system: List[BiPoly], F: FiniteField,
                            degree_bound: int):
    """Common zeros of a zero-dimensional bivariate system over extensions
    of F with total residue degree <= degree_bound (relative to F_p).

    Raises UnsupportedGeometry when the common zero locus is positive
    dimensional (the non-regular locus would contain a curve)."""
    system = [g for g in system if not g.is_zero()]
    if not system:
        raise UnsupportedGeometry("empty system: candidate locus is a surface")
    for g in system:
        if g.is_constant():
            return
    xname, yname = system[0].xname, system[0].yname
    elim = _eliminant(system, F, eliminate_y=True)
    swap = False
    if elim is None:
        common = system[0]
        from ..algebra.bivariate import _bi_gcd
        for g in system[1:]:
            common = _bi_gcd(common, g)
        if not common.is_constant():
            raise UnsupportedGeometry(
                "non-isolated singular locus (a whole curve fails regularity); "
                "resolving it needs a curve centre, which is unsupported")
        elim = _eliminant(system, F, eliminate_y=False)
        if elim is None:
            raise UnsupportedGeometry("cannot isolate singular candidates")
        swap = True
    first, second = (yname, xname) if swap else (xname, yname)
    for u, _ in factor_univariate(F, elim):
        d = poly_deg(u)
        if d * F.deg > degree_bound:
            if _candidate_real(system, F, u, swap):
                raise DegreeBoundExceeded(
                    f"singular candidate of residue degree {d * F.deg} "
                    f"exceeds bound {degree_bound}")
            continue
        big = FiniteField(F.p, F.deg * d) if d > 1 else F
        phi = (lambda c: c) if d == 1 else F.embed_into(big)
        u_big = [phi(c) for c in u]
        for xval in roots(big, u_big):
            unis = []
            for g in system:
                gg = g if not swap else g.swap()
                gb = gg if d == 1 else gg.map_into(big, phi)
                unis.append(gb.eval_x(xval))
            nonzero = [w for w in unis if w]
            if not nonzero:
                raise UnsupportedGeometry("candidate fibre direction unconstrained")
            g0 = nonzero[0]
            for w in nonzero[1:]:
                g0 = poly_gcd(big, g0, w)
                if poly_deg(g0) == 0:
                    break
            if poly_deg(g0) == 0:
                continue
            for irr, _ in factor_univariate(big, g0):
                dd = poly_deg(irr)
                if dd == 1:
                    yield big, {first: xval, second: big.neg(irr[0])}
                elif big.deg * dd <= degree_bound:
                    bigger = FiniteField(F.p, big.deg * dd)
                    psi = big.embed_into(bigger)
                    irr_b = [psi(c) for c in irr]
                    xb = psi(xval)
                    for yval in roots(bigger, irr_b):
                        yield bigger, {first: xb, second: yval}
                else:
                    raise DegreeBoundExceeded(
                        f"singular candidate of residue degree {big.deg * dd} "
                        f"exceeds bound {degree_bound}")


def _eliminant(system: List[BiPoly], F: FiniteField, eliminate_y: bool):
    polys = [g if eliminate_y else g.swap() for g in system]
    with_y = [g for g in polys if g.deg_y() >= 1]
    without_y = [g for g in polys if g.deg_y() == 0]
    acc: List = []
    for g in without_y:
        row = g.y_coeffs()[0]
        acc = list(row) if not acc else poly_gcd(F, acc, row)
    for i in range(len(with_y)):
        for j in range(i + 1, len(with_y)):
            r = _bi_resultant_y(with_y[i], with_y[j])
            if r:
                acc = r if not acc else poly_gcd(F, acc, r)
    if len(with_y) == 1 and not acc:
        return None
    acc = poly_trim(F, list(acc)) if acc else []
    if not acc:
        return None
    return acc


def _bi_resultant_y(a: BiPoly, b: BiPoly):
    """Res_y(a, b) as a univariate polynomial in x."""
    F = a.F
    ac = a.y_coeffs()
    bc = b.y_coeffs()
    da, db = len(ac) - 1, len(bc) - 1
    n = da + db
    if n == 0:
        return [F.one]
    rows = []
    for i in range(db):
        row = [[] for _ in range(n)]
        for j, c in enumerate(reversed(ac)):
            row[i + j] = list(c)
        rows.append(row)
    for i in range(da):
        row = [[] for _ in range(n)]
        for j, c in enumerate(reversed(bc)):
            row[i + j] = list(c)
        rows.append(row)
    return _poly_det_ff(F, rows)


def _poly_det_ff(F: FiniteField, rows):
    from ..algebra.finitefield import poly_add, poly_mul, poly_sub
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = []
    for j in range(n):
        minor = _poly_det_ff(F, [r[:j] + r[j + 1:] for r in rows[1:]])
        term = poly_mul(F, rows[0][j], minor)
        total = poly_sub(F, total, term) if j % 2 else poly_add(F, total, term)
    return total


def _candidate_real(system, F, u, swap) -> bool:
    """Whether an over-bound eliminant factor supports a true common zero."""
    d = poly_deg(u)
    if F.deg * d > 12:
        return True
    big = FiniteField(F.p, F.deg * d)
    phi = F.embed_into(big)
    u_big = [phi(c) for c in u]
    for xval in roots(big, u_big):
        unis = []
        for g in system:
            gg = g if not swap else g.swap()
            unis.append(gg.map_into(big, phi).eval_x(xval))
        nonzero = [w for w in unis if w]
        if not nonzero:
            return True
        g0 = nonzero[0]
        for w in nonzero[1:]:
            g0 = poly_gcd(big, g0, w)
        if poly_deg(g0) >= 1:
            return True
    return False


def singular_points(surface: Surface, degree_bound: int = 4) -> List[ClosedPoint]:
    """All non-regular closed points, deduplicated across charts; the
    deterministic order (chart index, then point data) fixes the blowup
    order of the resolution driver."""
    groups: Dict[tuple, ClosedPoint] = {}
    for chart in surface.active_charts():
        for cp in chart_singular_points(chart, degree_bound):
            key = canonical_closed_point_key(surface, cp)
            if key not in groups or cp.sort_key() < groups[key].sort_key():
                groups[key] = cp
    return sorted(groups.values(), key=lambda c: c.sort_key())
