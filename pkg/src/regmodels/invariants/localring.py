"""Computations in the local ring at the generic point of a fibre component.

Let Gamma be a component of the special fibre on some chart, lying on a
branch with free variables (lam, mu).  Localizing the chart ring at the
generic point of the lam-line presents the surface as a relative curve
over the base Lambda = ((Z/p^M)[lam] localized at (p)): eliminating the
other chart variables through relations with unit coefficients and
clearing denominators turns the model generator into a single polynomial
G*(lam, mu).  A two-factor Hensel split isolates the factor G with
reduction gbar^m (gbar the component equation, m its fibre exponent), and

    A = Lambda[mu] / (G)

is the completed local ring at the generic point xi of Gamma.  The
valuation v_xi is computed through membership in the ideals

    I_N = ({ p^j g^i :  i + j*d >= N })        (d = v_xi(pi) = m)

by triangular linear algebra over Lambda; v_xi(z) = max { N : z in I_N }.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from ..algebra.bivariate import BiPoly, RationalFunctionField
from ..algebra.finitefield import (FiniteField, poly_deg, poly_divmod,
                                   poly_gcd, poly_mul, poly_scalar, poly_sub,
                                   poly_trim, poly_xgcd)
from ..algebra.poly import PadicPoly
from ..errors import (BudgetExhausted, PrecisionExhausted,
                      UnsupportedGeometry)
from ..model.branches import FibreBranch
from ..model.chart import Chart

# ---------------------------------------------------------------------------
# the base ring Lambda: fractions f/g over (Z/p^M)[lam] with g a p-unit
# ---------------------------------------------------------------------------


class LocalBase:
    """(Z/p^M)[lam] localized at (p); elements are (num, den) univariate
    truncated polynomials with den nonzero mod p."""

    def __init__(self, p: int, M: int, varname: str):
        self.p = p
        self.M = M
        self.varname = varname
        self.zero = (PadicPoly.zero(p, M), PadicPoly.constant(1, p, M))
        self.one = (PadicPoly.constant(1, p, M), PadicPoly.constant(1, p, M))

    def from_poly(self, num: PadicPoly, den: Optional[PadicPoly] = None):
        if den is None:
            den = PadicPoly.constant(1, self.p, self.M)
        if den.is_zero() or den.min_coeff_valuation() != 0:
            raise PrecisionExhausted("denominator is not a p-unit")
        return (num, den)

    def from_int(self, n: int):
        return (PadicPoly.constant(n, self.p, self.M),
                PadicPoly.constant(1, self.p, self.M))

    def is_zero(self, a) -> bool:
        return a[0].is_zero()

    def add(self, a, b):
        return (a[0] * b[1] + b[0] * a[1], a[1] * b[1])

    def neg(self, a):
        return (-a[0], a[1])

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        return (a[0] * b[0], a[1] * b[1])

    def inv(self, a):
        if a[0].is_zero() or a[0].min_coeff_valuation() != 0:
            raise PrecisionExhausted("inverting a non-unit of the local base")
        return (a[1], a[0])

    def valuation(self, a) -> Optional[int]:
        """p-adic valuation; None means indistinguishable from 0 at cap."""
        return a[0].min_coeff_valuation()

    def divide_p(self, a, e: int):
        return (a[0].divide_by_pi_power(e), a[1])

    def unit_part_inverse(self, a):
        """a = p^v * u with u a unit: returns (v, u^{-1})."""
        v = self.valuation(a)
        if v is None:
            raise PrecisionExhausted("unit part of an exhausted element")
        num = a[0].divide_by_pi_power(v) if v else a[0]
        return v, (a[1], num)

    def reduce_mod_p(self, a, F: FiniteField, K: RationalFunctionField):
        """Image in F_p(lam) (as a RationalFunctionField element)."""
        num = [F.from_int(c) for c in _coeff_list(a[0], self.varname)]
        den = [F.from_int(c) for c in _coeff_list(a[1], self.varname)]
        nn = K._norm(num, den)
        return nn


def _coeff_list(poly: PadicPoly, varname: str) -> List[int]:
    if poly.is_zero():
        return [0]
    coeffs = poly.as_univariate(varname)
    return [c.constant_value().residue for c in coeffs]


# ---------------------------------------------------------------------------
# presentation of the local ring at a component's generic point
# ---------------------------------------------------------------------------


@dataclass
class ComponentPresentation:
    chart_id: int
    lam: str                      # transcendental coordinate on the component
    mu: str                       # algebraic coordinate
    base: LocalBase
    G: List[tuple]                # monic factor over Lambda[mu], coeff list
    g_lift: List[tuple]           # lift of gbar, monic in mu
    gbar: List                    # component equation over F_p(lam)[mu]
    multiplicity: int             # m = exponent of gbar = v_xi(pi)
    F: FiniteField
    K: RationalFunctionField
    subs: Dict[str, Tuple[tuple, tuple]]   # chart var -> (num, den) in base-frac over (lam, mu)? see apply

    @property
    def D(self) -> int:
        return len(self.G) - 1


def _padic_to_base_poly(poly: PadicPoly, lam: str, mu: str,
                        base: LocalBase) -> List[tuple]:
    """A chart polynomial in (lam, mu) as a mu-list of base elements."""
    out = []
    for c in poly.as_univariate(mu):
        out.append(base.from_poly(c))
    # trim
    while out and base.is_zero(out[-1]):
        out.pop()
    return out


def _base_poly_mul(base, a, b):
    if not a or not b:
        return []
    out = [base.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = base.add(out[i + j], base.mul(x, y))
    return _base_trim(base, out)


def _base_trim(base, a):
    while a and base.is_zero(a[-1]):
        a.pop()
    return a


def _base_poly_add(base, a, b):
    n = max(len(a), len(b))
    return _base_trim(base, [
        base.add(a[i] if i < len(a) else base.zero,
                 b[i] if i < len(b) else base.zero) for i in range(n)])


def _base_poly_sub(base, a, b):
    return _base_poly_add(base, a, [base.neg(x) for x in b])


def _base_poly_divmod_monic(base, a, b):
    """Division by a monic polynomial over the base."""
    a = list(a)
    db = len(b) - 1
    q = [base.zero] * max(0, len(a) - db)
    while len(a) - 1 >= db and a:
        c = a[-1]
        if base.is_zero(c):
            a.pop()
            continue
        k = len(a) - 1 - db
        q[k] = c
        for i in range(db + 1):
            a[k + i] = base.sub(a[k + i], base.mul(c, b[i]))
        a.pop()
    return q, _base_trim(base, a)


def presentation_for_component(chart: Chart, branch: FibreBranch,
                               gbar: BiPoly, mult: int) -> ComponentPresentation:
    """Build the local model A = Lambda[mu]/(G) at the component's generic
    point.  Requires the branch base field to be F_p and gbar to involve mu."""
    if branch.field.deg != 1:
        raise UnsupportedGeometry(
            "component presentations over extension branch fields are not supported")
    p, M = chart.p, chart.precision
    s, t = branch.free_vars
    # mu must carry positive gbar-degree; prefer the one of smaller degree
    deg_s = gbar.deg_x() if gbar.xname == s else gbar.deg_y()
    deg_t = gbar.deg_y() if gbar.yname == t else gbar.deg_x()
    if deg_t >= 1 and (deg_s == 0 or deg_t <= deg_s):
        lam, mu = s, t
    elif deg_s >= 1:
        lam, mu = t, s
    else:
        raise UnsupportedGeometry("component equation is constant")
    base = LocalBase(p, M, lam)
    F = branch.field
    K = RationalFunctionField(F)

    # p-adic elimination of the non-free variables; the solving coefficient
    # must be a unit at the generic point of the component (nonzero on the
    # branch and not divisible by the component equation)
    from ..algebra.bivariate import bi_exact_div
    eliminated: Dict[str, Tuple[PadicPoly, PadicPoly]] = {}
    pending = list(chart.relations)
    others = [v for v in chart.variables if v not in (lam, mu)]
    guard = 0
    while others:
        guard += 1
        if guard > 2 * len(chart.variables) + 4:
            raise UnsupportedGeometry("cannot eliminate chart variables p-adically")
        progress = False
        for rel in list(pending):
            for w in others:
                if rel.degree(w) != 1:
                    continue
                coeffs = rel.as_univariate(w)
                cpoly, rest = coeffs[1], coeffs[0]
                if any(cpoly.degree(v) > 0 for v in others):
                    continue
                cbar = _restrict_mod_p(cpoly, branch, F)
                if cbar is None or cbar.is_zero():
                    continue
                cbar_bi = cbar.to_bipoly(branch.free_vars[0], branch.free_vars[1])
                if not cbar_bi.is_constant() and bi_exact_div(cbar_bi, gbar) is not None:
                    continue
                eliminated[w] = (-rest, cpoly)
                pending.remove(rel)
                others.remove(w)
                progress = True
                break
            if progress:
                break
        if not progress:
            raise UnsupportedGeometry(
                "no relation is linear with a unit coefficient in a removable variable")

    # iterate substitution into numerators/denominators until closed
    def resolve(poly: PadicPoly) -> Tuple[PadicPoly, PadicPoly]:
        num, den = poly, PadicPoly.constant(1, p, M)
        for _ in range(len(eliminated) + 2):
            bad = [v for v in num.variables if v in eliminated and num.degree(v) > 0]
            bad += [v for v in den.variables if v in eliminated and den.degree(v) > 0]
            if not bad:
                return num, den
            w = bad[0]
            nw, dw = eliminated[w]
            dnum = num.degree(w)
            dden = den.degree(w)
            num = _clear_substitute(num, w, nw, dw)
            den = _clear_substitute(den, w, nw, dw)
            if dnum > dden:
                den = den * dw**(dnum - dden)
            elif dden > dnum:
                num = num * dw**(dden - dnum)
        raise UnsupportedGeometry("substitution chain did not close p-adically")

    gen_num, gen_den = resolve(chart.generator)
    Gstar = _padic_to_base_poly(gen_num, lam, mu, base)
    if not Gstar:
        raise UnsupportedGeometry("generator vanished in the local presentation")

    # reduce mod p and split off the gbar^mult factor
    gbar_list = _bipoly_to_Kpoly(gbar, lam, mu, K)
    Gbar = [base.reduce_mod_p(c, F, K) for c in Gstar]
    Gbar = poly_trim(K, Gbar)
    target = [K.one]
    for _ in range(mult):
        target = poly_mul(K, target, gbar_list)
    cof, rem = poly_divmod(K, Gbar, target)
    if poly_trim(K, rem):
        raise UnsupportedGeometry("component power does not divide the fibre equation")
    g_irrelevant = poly_gcd(K, target, cof)
    if poly_deg(g_irrelevant) != 0:
        raise UnsupportedGeometry("component factor is not coprime to its cofactor")
    G = _hensel_split(base, Gstar, target, cof, F, K)
    g_lift = _lift_K_poly(gbar_list, base, F)
    return ComponentPresentation(
        chart_id=chart.chart_id, lam=lam, mu=mu, base=base, G=G,
        g_lift=g_lift, gbar=gbar_list, multiplicity=mult, F=F, K=K,
        subs={w: (resolve(PadicPoly.var(w, p, M))) for w in eliminated})


def _clear_substitute(poly: PadicPoly, w: str, nw: PadicPoly,
                      dw: PadicPoly) -> PadicPoly:
    d = poly.degree(w)
    if d == 0:
        return poly
    out = None
    for i, c in enumerate(poly.as_univariate(w)):
        term = c * nw**i * dw**(d - i)
        out = term if out is None else out + term
    return out


def _restrict_mod_p(poly: PadicPoly, branch: FibreBranch, F: FiniteField):
    from ..model.mpoly import MPoly
    m = MPoly.from_padic(poly, F)
    for var, (num, den) in branch.subs.items():
        m, _ = m.substitute_cleared(var, num, den)
    return m


def _bipoly_to_Kpoly(g: BiPoly, lam: str, mu: str, K: RationalFunctionField):
    """BiPoly in (lam, mu) as a monic mu-coefficient list over F_p(lam)."""
    if g.yname != mu:
        g = g.swap()
    if g.yname != mu or (g.xname != lam and g.deg_x() > 0):
        raise ValueError("component equation variables do not match the presentation")
    cols = g.y_coeffs()
    out = [K.from_poly(c) if c else K.zero for c in cols]
    out = poly_trim(K, out)
    lc = out[-1]
    return poly_scalar(K, out, K.inv(lc))


def _lift_K_poly(kpoly, base: LocalBase, F: FiniteField) -> List[tuple]:
    out = []
    for num, den in kpoly:
        n = PadicPoly.from_univariate([c[0] for c in num] or [0],
                                      base.varname, base.p, base.M)
        d = PadicPoly.from_univariate([c[0] for c in den] or [1],
                                      base.varname, base.p, base.M)
        out.append(base.from_poly(n, d))
    return out


def _hensel_split(base: LocalBase, Gstar, target, cof, F, K):
    """Lift  Gbar = target * cof  (coprime, target monic) to  Gstar = G * H
    over Lambda; returns the monic factor G with reduction = target."""
    p, M = base.p, base.M
    _, S, T = poly_xgcd(K, target, cof)
    # S*target + T*cof = 1
    G = _lift_K_poly(target, base, F)
    H = _lift_K_poly(cof, base, F)
    # restore the true leading unit of H: Gstar's leading coefficient
    for k in range(1, M):
        prod = _base_poly_mul(base, G, H)
        err = _base_poly_sub(base, Gstar, prod)
        err = _base_trim(base, err)
        if not err:
            break
        # digit at p^k
        digit = []
        ok = True
        for c in err:
            v = base.valuation(c)
            if v is not None and v < k:
                ok = False
                break
        if not ok:
            raise PrecisionExhausted("hensel split lost the congruence invariant")
        digit = [base.reduce_mod_p(base.divide_p(c, k), F, K)
                 if base.valuation(c) is not None else K.zero for c in err]
        digit = poly_trim(K, digit)
        if not digit:
            continue
        # delta_G = (digit * T) mod target;  delta_H = digit*S + q*cof
        dT = poly_mul(K, digit, T)
        q, dG = poly_divmod(K, dT, target)
        dH = poly_mul(K, digit, S)
        dH = _K_add(K, dH, poly_mul(K, q, cof))
        liftG = _lift_K_poly(dG, base, F) if dG else []
        liftH = _lift_K_poly(dH, base, F) if dH else []
        pk = PadicPoly.constant(p**k, p, M)
        G = _base_poly_add(base, G, [(n * pk, d) for n, d in liftG])
        H = _base_poly_add(base, H, [(n * pk, d) for n, d in liftH])
    # make G exactly monic (its lc is a unit congruent to 1)
    lc = G[-1]
    lc_inv = base.inv(lc)
    G = [base.mul(c, lc_inv) for c in G]
    return G


def _K_add(K, a, b):
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else K.zero
        y = b[i] if i < len(b) else K.zero
        out.append(K.add(x, y))
    return poly_trim(K, out)


# ---------------------------------------------------------------------------
# elements of A and the valuation at xi
# ---------------------------------------------------------------------------


class LocalElement:
    """An element of Frac(A): (vector over Lambda of length D) / p^k."""

    __slots__ = ("pres", "vec", "pshift")

    def __init__(self, pres: ComponentPresentation, vec, pshift: int = 0):
        self.pres = pres
        self.vec = vec                # list of base elements, length D
        self.pshift = pshift          # element = vec / p^pshift


def element_from_chart_poly(pres: ComponentPresentation, chart: Chart,
                            poly: PadicPoly) -> LocalElement:
    """Reduce a chart polynomial into A (denominators from the elimination
    are units at xi and are divided away through the base field)."""
    base = pres.base
    p, M = base.p, base.M
    num, den = poly, PadicPoly.constant(1, p, M)
    for _ in range(len(pres.subs) + 2):
        bad = [v for v in num.variables
               if v in pres.subs and num.degree(v) > 0]
        bad += [v for v in den.variables
                if v in pres.subs and den.degree(v) > 0]
        if not bad:
            break
        w = bad[0]
        nw, dw = pres.subs[w]
        dn, dd = num.degree(w), den.degree(w)
        num = _clear_substitute(num, w, nw, dw)
        den = _clear_substitute(den, w, nw, dw)
        if dn > dd:
            den = den * dw**(dn - dd)
        elif dd > dn:
            num = num * dw**(dd - dn)
    numlist = _padic_to_base_poly(num, pres.lam, pres.mu, base)
    denlist = _padic_to_base_poly(den, pres.lam, pres.mu, base)
    nred = _reduce_mod_G(pres, numlist)
    dred = _reduce_mod_G(pres, denlist)
    inv = _invert_in_A(pres, dred)
    prod = _A_mul(pres, nred, inv[0])
    return LocalElement(pres, prod, inv[1])


def _reduce_mod_G(pres, vec):
    base = pres.base
    q, r = _base_poly_divmod_monic(base, list(vec), pres.G)
    r = list(r) + [base.zero] * (pres.D - len(r))
    return r[:pres.D]


def _A_mul(pres, a, b):
    prod = _base_poly_mul(pres.base, list(a), list(b))
    return _reduce_mod_G(pres, prod)


def _invert_in_A(pres, vec):
    """Invert an element of A whose image at xi is a unit: returns
    (vector, pshift) with inverse = vector / p^pshift."""
    base = pres.base
    K, F = pres.K, pres.F
    # mod p the element must be invertible mod gbar^m... it suffices to be
    # a unit at xi: invertible modulo (p, gbar).  Solve by lifting.
    vbar = [base.reduce_mod_p(c, F, K) for c in vec]
    vbar = poly_trim(K, list(vbar))
    if not vbar:
        # divide by p and retry
        vals = [base.valuation(c) for c in vec]
        vals = [v for v in vals if v is not None]
        if not vals:
            raise PrecisionExhausted("inverting an element that vanished at cap")
        shift = min(vals)
        if shift == 0:
            raise PrecisionExhausted("inconsistent unit inversion")
        newvec = [base.divide_p(c, shift) for c in vec]
        v2, s2 = _invert_in_A(pres, newvec)
        return v2, s2 - shift
    gmod = pres.gbar
    gg, S, T = poly_xgcd(K, vbar, gmod)
    if poly_deg(gg) != 0:
        raise UnsupportedGeometry("element not invertible at the generic point")
    # Newton iteration in A (p-adic): z_{k+1} = z_k (2 - v z_k)
    z = _lift_K_poly(poly_scalar(K, S, K.inv(gg[0])), pres.base, F)
    z = _reduce_mod_G(pres, z)
    two = [pres.base.from_int(2)] + [pres.base.zero] * (pres.D - 1)
    newton_steps = (pres.multiplicity * pres.base.M).bit_length() + 2
    for _ in range(newton_steps):
        vz = _A_mul(pres, vec, z)
        err = [pres.base.sub(two[i], vz[i]) for i in range(pres.D)]
        z = _A_mul(pres, z, err)
    # check
    vz = _A_mul(pres, vec, z)
    if not _is_one(pres, vz):
        raise UnsupportedGeometry("unit inversion in A failed")
    return z, 0


def _is_one(pres, vec):
    base = pres.base
    first = base.sub(vec[0], base.one)
    if not base.is_zero(first):
        return False
    return all(base.is_zero(c) for c in vec[1:])


# -- the tau-adic ideals and the valuation ---------------------------------------


def _ideal_rows(pres: ComponentPresentation, N: int):
    """Generators of I_N = ({p^j g^i : i + j d >= N}) as Lambda-module rows."""
    base = pres.base
    d = pres.multiplicity
    rows = []
    gens = []
    j = 0
    while j * d < N + d:
        i = max(0, N - j * d)
        gens.append((i, j))
        j += 1
    one = [base.one]
    gpow: Dict[int, list] = {0: one}
    maxi = max(i for i, _ in gens)
    for k in range(1, maxi + 1):
        gpow[k] = _base_poly_mul(base, gpow[k - 1], pres.g_lift)
    for i, j in gens:
        pj = PadicPoly.constant(base.p**j, base.p, base.M)
        head = [(n * pj, dd) for n, dd in gpow[i]]
        head = _reduce_mod_G(pres, head)
        for shift in range(pres.D):
            row = _reduce_mod_G(pres, [base.zero] * shift + list(head))
            rows.append(row)
    return rows


def _echelon_reduce(pres, rows):
    """Triangularize module rows over Lambda (pivoting on minimal p-valuation)."""
    base = pres.base
    D = pres.D
    work = [list(r) for r in rows]
    pivots = []               # (col, valuation, row)
    for col in range(D):
        best = None
        for idx, row in enumerate(work):
            if all(base.is_zero(c) for c in row[:col]):
                v = base.valuation(row[col])
                if v is not None and (best is None or v < best[0]):
                    best = (v, idx)
        if best is None:
            continue
        v, idx = best
        piv = work.pop(idx)
        _, unit_inv = base.unit_part_inverse(piv[col])
        piv = [base.mul(c, unit_inv) for c in piv]       # pivot = p^v at col
        newwork = []
        for row in work:
            if all(base.is_zero(c) for c in row[:col]):
                w = base.valuation(row[col])
                if w is not None:
                    _, u_inv = base.unit_part_inverse(row[col])
                    # row - (rowcol / pivcol) * piv ; rowcol/pivcol = p^{w-v} * unit
                    factor_num = base.inv(u_inv)
                    scale = base.mul(
                        (PadicPoly.constant(base.p**(w - v), base.p, base.M),
                         PadicPoly.constant(1, base.p, base.M)), factor_num)
                    row = [base.sub(a, base.mul(scale, b))
                           for a, b in zip(row, piv)]
            newwork.append(row)
        work = newwork
        pivots.append((col, v, piv))
    return pivots


def _membership(pres, pivots, vec) -> bool:
    base = pres.base
    row = list(vec)
    for col, v, piv in pivots:
        c = row[col]
        if base.is_zero(c):
            continue
        w = base.valuation(c)
        if w is None:
            continue
        if w < v:
            return False
        _, u_inv = base.unit_part_inverse(c)
        scale = base.mul((PadicPoly.constant(base.p**(w - v), base.p, base.M),
                          PadicPoly.constant(1, base.p, base.M)),
                         base.inv(u_inv))
        row = [base.sub(a, base.mul(scale, b)) for a, b in zip(row, piv)]
    return all(base.is_zero(c) for c in row)


class ValuationEngine:
    """Caches ideal echelons per level for one component presentation."""

    def __init__(self, pres: ComponentPresentation):
        self.pres = pres
        self._echelons: Dict[int, list] = {}

    def echelon(self, N: int):
        if N not in self._echelons:
            self._echelons[N] = _echelon_reduce(self.pres, _ideal_rows(self.pres, N))
        return self._echelons[N]

    def in_level(self, elt: LocalElement, N: int) -> bool:
        """Is v_xi(elt) >= N?  (correcting for the p-denominator)."""
        target = N + elt.pshift * self.pres.multiplicity
        if target <= 0:
            return True
        cap = (self.pres.base.M - 1) * self.pres.multiplicity
        if target > cap:
            raise PrecisionExhausted(
                f"order comparison at level {target} exceeds the cap {cap}")
        return _membership(self.pres, self.echelon(target), elt.vec)

    def valuation(self, elt: LocalElement, budget: int = 60) -> int:
        if all(self.pres.base.is_zero(c) for c in elt.vec):
            raise PrecisionExhausted("valuation of an element that is 0 at cap")
        N = 0
        while N <= budget:
            if not self.in_level(elt, N + 1):
                return N
            N += 1
        raise BudgetExhausted("order extraction budget exceeded")

    def pi_multiplicity_check(self) -> int:
        """v_xi(pi) computed honestly; must equal the fibre exponent."""
        base = self.pres.base
        vec = [base.from_int(self.pres.base.p)] + \
            [base.zero] * (self.pres.D - 1)
        return self.valuation(LocalElement(self.pres, vec))
