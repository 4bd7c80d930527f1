"""Regular differentials: wedge coefficients, orders along fibre components,
the per-component lattices, their intersection, and the BSD fudge factor.

A differential on a chart is (sum_j a_j dT_j)/c.  With F_1..F_{n-1} the
chart's complete-intersection presentation, the wedge coefficient u_j is
defined by dF_1 ^ .. ^ dF_{n-1} ^ dT_j = u_j dT_1 ^ .. ^ dT_n, and the
trivialized image of the differential on the curve is (sum a_j u_j)/c.
Regularity along a component Gamma is nonnegativity of the order of that
function at Gamma's generic point, computed by the local-ring engine.

Lattices live in K^g with columns over Q (p-power denominators); the
canonical representative is a column Hermite form over Z_p.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .algebra.poly import PadicPoly
from .errors import BudgetExhausted, PrecisionExhausted, UnsupportedGeometry
from .invariants.fibre import Component, SpecialFibre
from .invariants.localring import (ComponentPresentation, LocalElement,
                                   ValuationEngine, element_from_chart_poly,
                                   presentation_for_component)
from .model.chart import Chart, Surface


# ---------------------------------------------------------------------------
# wedge coefficients and differential restrictions per chart
# ---------------------------------------------------------------------------


def wedge_coefficient(chart: Chart, j: str) -> PadicPoly:
    """u_j with dF_1 ^ ... ^ dF_{n-1} ^ dT_j = u_j dT_1 ^ ... ^ dT_n."""
    if j not in chart.variables:
        raise ValueError(f"{j} is not a chart variable")
    gens = list(chart.relations) + [chart.generator]
    n = len(chart.variables)
    if len(gens) != n - 1:
        raise UnsupportedGeometry("chart is not a complete-intersection presentation")
    rows = [[g.partial(v) for v in chart.variables] for g in gens]
    unit_row = [PadicPoly.constant(1 if v == j else 0, chart.p, chart.precision)
                for v in chart.variables]
    rows.append(unit_row)
    return _pdet(rows)


def _pdet(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = None
    for k in range(n):
        minor = _pdet([r[:k] + r[k + 1:] for r in rows[1:]])
        term = rows[0][k] * minor
        if k % 2:
            term = -term
        total = term if total is None else total + term
    return total


@dataclass
class ChartDifferential:
    """(sum_j a_j dT_j)/c on a specific chart."""
    chart_id: int
    numerators: Dict[str, PadicPoly]
    denominator: PadicPoly


def hyperelliptic_basis_on_chart(surface: Surface, chart: Chart,
                                 genus: int) -> List[ChartDifferential]:
    """The standard basis x^{i-1} dx / y pulled back to a chart.

    On the second root chart the same differentials read -u^{g-i} du / v;
    on blowup charts the root coordinates are polynomial in the chart
    coordinates, so dX = sum dX/dT_j dT_j stays polynomial.
    """
    p, M = surface.p, surface.precision
    root = chart
    while root.parent_id is not None:
        root = surface.charts[root.parent_id]
    rootvars = ("x", "y") if root.root_id == 0 else ("u", "v")
    # root coordinates as polynomials in the chart coordinates: compose the
    # blowdown expressions walking from the root towards the chart
    exprs = {rv: PadicPoly.var(rv, p, M) for rv in rootvars}
    for link in reversed(_chain_top_down(surface, chart)):
        exprs = {rv: e.substitute(link.to_parent) for rv, e in exprs.items()}
    cur = root
    X, Y = exprs[rootvars[0]], exprs[rootvars[1]]
    out = []
    for i in range(1, genus + 1):
        if cur.root_id == 0:
            scale = X**(i - 1)
        else:
            scale = -(X**(genus - i))
        nums = {v: scale * X.partial(v) for v in chart.variables}
        out.append(ChartDifferential(chart.chart_id, nums, Y))
    return out


def _chain_top_down(surface: Surface, chart: Chart):
    """Charts from `chart` up to (excluding) the root, for substitution
    in that order: chart coords -> parent coords -> ... -> root coords."""
    out = []
    cur = chart
    while cur.parent_id is not None:
        out.append(cur)
        cur = surface.charts[cur.parent_id]
    return out


# ---------------------------------------------------------------------------
# orders along components
# ---------------------------------------------------------------------------


class ComponentOrderEngine:
    """Orders of differentials along one component of the special fibre."""

    def __init__(self, surface: Surface, component: Component, genus: int):
        self.surface = surface
        self.component = component
        self.genus = genus
        self.pres: Optional[ComponentPresentation] = None
        self.engine: Optional[ValuationEngine] = None
        self.chart: Optional[Chart] = None
        err = None
        for piece in component.pieces:
            chart = surface.charts[piece.chart_id]
            try:
                self.pres = presentation_for_component(
                    chart, piece.branch, piece.equation, piece.multiplicity)
                self.engine = ValuationEngine(self.pres)
                self.chart = chart
                break
            except (UnsupportedGeometry, PrecisionExhausted) as exc:
                err = exc
        if self.pres is None:
            raise UnsupportedGeometry(
                f"no chart presents component {component.index}: {err}")
        self.wedges = {v: wedge_coefficient(self.chart, v)
                       for v in self.chart.variables}
        self.basis = hyperelliptic_basis_on_chart(surface, self.chart, genus)
        self._numerators = []
        for omega in self.basis:
            num = None
            for v, a in omega.numerators.items():
                term = a * self.wedges[v]
                num = term if num is None else num + term
            self._numerators.append(element_from_chart_poly(
                self.pres, self.chart, num))
        self._den = element_from_chart_poly(self.pres, self.chart,
                                            self.basis[0].denominator)
        self._den_order = self.engine.valuation(self._den)

    @property
    def multiplicity(self) -> int:
        return self.pres.multiplicity

    def numerator_element(self, coeffs: List[Fraction]) -> Tuple[LocalElement, int]:
        """sum coeffs_i * N_i as (element, pshift): coeffs are rationals with
        p-power denominators."""
        p = self.surface.p
        M = self.surface.precision
        K = 0
        for c in coeffs:
            d = c.denominator
            k = 0
            while d % p == 0:
                d //= p
                k += 1
            if d != 1:
                raise ValueError("lattice coefficients must have p-power denominators")
            K = max(K, k)
        vec = [None] * self.pres.D
        base = self.pres.base
        total = [base.zero] * self.pres.D
        for c, elt in zip(coeffs, self._numerators):
            scaled = int(c * p**K)
            if scaled % p**M == 0 and scaled != 0:
                continue
            shift_adjust = elt.pshift
            if shift_adjust:
                raise PrecisionExhausted("unexpected denominator in a numerator")
            for i in range(self.pres.D):
                term = base.mul(base.from_int(scaled), elt.vec[i])
                total[i] = base.add(total[i], term)
        return LocalElement(self.pres, total, K), K

    def order_of_combination(self, coeffs: List[Fraction]) -> int:
        elt, _ = self.numerator_element(coeffs)
        return self.engine.valuation(elt) - self._den_order

    def combination_regular_to_level(self, coeffs: List[Fraction],
                                     level: int) -> bool:
        """ord(sum coeffs_i omega_i) >= level?"""
        elt, _ = self.numerator_element(coeffs)
        return self.engine.in_level(elt, level + self._den_order)

    def basis_orders(self) -> List[int]:
        return [self.engine.valuation(n) - self._den_order
                for n in self._numerators]


def ord_along_component(surface: Surface, component: Component,
                        omega_coeffs: List[Fraction], genus: int) -> int:
    engine = ComponentOrderEngine(surface, component, genus)
    return engine.order_of_combination(omega_coeffs)


# ---------------------------------------------------------------------------
# lattices
# ---------------------------------------------------------------------------


@dataclass
class RegularLattice:
    basis: List[List[Fraction]]       # columns, in omega-coordinates

    @property
    def genus(self) -> int:
        return len(self.basis[0]) if self.basis else 0

    def determinant_valuation(self, p: int) -> int:
        det = _det_fraction([[self.basis[j][i] for j in range(len(self.basis))]
                             for i in range(len(self.basis))])
        return _vp_fraction(det, p)


def _det_fraction(rows: List[List[Fraction]]) -> Fraction:
    n = len(rows)
    rows = [r[:] for r in rows]
    det = Fraction(1)
    for c in range(n):
        sel = next((i for i in range(c, n) if rows[i][c] != 0), None)
        if sel is None:
            return Fraction(0)
        if sel != c:
            rows[c], rows[sel] = rows[sel], rows[c]
            det = -det
        det *= rows[c][c]
        inv = 1 / rows[c][c]
        rows[c] = [x * inv for x in rows[c]]
        for i in range(c + 1, n):
            if rows[i][c]:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[c])]
    return det


def _vp_fraction(x: Fraction, p: int) -> int:
    if x == 0:
        raise ValueError("valuation of zero")
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def _mod_power(e: Fraction, v: int, p: int) -> Fraction:
    """Canonical representative of e mod p^v Z_p among fractions a/p^k with
    0 <= a < p^{v+k} (k the p-power in e's denominator)."""
    if e == 0:
        return e
    k = max(0, -_vp_fraction(e, p))
    scaled = e * p**k
    assert scaled.denominator == 1
    return Fraction(int(scaled) % p**(v + k), p**k)


def hermite_normalize(columns: List[List[Fraction]], p: int) -> List[List[Fraction]]:
    """Column Hermite form over Z_p: one pivot per row (a power of p, with
    unit leading coefficient scaled away), other columns' entries in the
    pivot row reduced to canonical representatives mod the pivot."""
    g = len(columns[0])
    remaining = [c[:] for c in columns]
    placed: List[Tuple[int, List[Fraction]]] = []
    for row in range(g - 1, -1, -1):
        nonzero = [c for c in remaining if c[row] != 0]
        if not nonzero:
            continue
        piv = min(nonzero, key=lambda c: (_vp_fraction(c[row], p),
                                          [str(x) for x in c]))
        remaining = [c for c in remaining if c is not piv]
        v = _vp_fraction(piv[row], p)
        unit = piv[row] / Fraction(p)**v
        piv = [x / unit for x in piv]
        newrem = []
        for c in remaining:
            if c[row] != 0:
                ratio = c[row] / piv[row]
                c = [a - ratio * b for a, b in zip(c, piv)]
            newrem.append(c)
        remaining = newrem
        placed.append((row, piv))
    if any(any(x != 0 for x in c) for c in remaining):
        raise ValueError("degenerate lattice basis")
    # reduce each pivot column against the pivots below it
    placed.sort(key=lambda t: t[0])
    for i in range(len(placed)):
        ri, ci = placed[i]
        for j in range(len(placed)):
            rj, cj = placed[j]
            if rj <= ri:
                continue
            vj = _vp_fraction(cj[rj], p)
            e = ci[rj]
            target = _mod_power(e, vj, p)
            if target != e:
                mult = (e - target) / cj[rj]
                placed[i] = (ri, [a - mult * b for a, b in zip(ci, cj)])
                ci = placed[i][1]
    return [c for _, c in placed]


def component_lattice(surface: Surface, component: Component,
                      genus: int, budget: int = 80) -> RegularLattice:
    """Hermite-canonical basis of the lattice of K-combinations of the
    basis differentials that are regular along the component."""
    engine = ComponentOrderEngine(surface, component, genus)
    return _saturate(engine, genus, surface.p, budget)


def _saturate(engine: ComponentOrderEngine, genus: int, p: int,
              budget: int) -> RegularLattice:
    d = engine.multiplicity
    cols: List[List[Fraction]] = [[Fraction(int(i == b)) for i in range(genus)]
                                  for b in range(genus)]

    def normalized(col):
        o = engine.order_of_combination(col)
        if o < 0:
            k = (-o + d - 1) // d
            col = [c * Fraction(p)**k for c in col]
            o += k * d
        elif o >= d:
            k = o // d
            col = [c / Fraction(p)**k for c in col]
            o -= k * d
        return col, o

    for _ in range(budget):
        cols = [normalized(c)[0] for c in cols]
        improved = False
        for mu in _projective_tuples(p, genus):
            combo = [sum(Fraction(mu[b]) * cols[b][i] for b in range(genus))
                     for i in range(genus)]
            if all(c == 0 for c in combo):
                continue
            if engine.combination_regular_to_level(combo, d):
                pivot = max(b for b in range(genus) if mu[b] % p != 0)
                cols[pivot] = [c / p for c in combo]
                improved = True
                break
        if not improved:
            return RegularLattice(hermite_normalize(cols, p))
    raise BudgetExhausted("lattice saturation budget exceeded")


def _projective_tuples(p: int, g: int):
    """Representatives of P^{g-1}(F_p): last nonzero coordinate is 1."""
    def rec(i):
        if i == g:
            yield ()
            return
        for rest in rec(i + 1):
            for c in range(p):
                yield (c,) + rest
    for tup in rec(0):
        nz = [i for i, c in enumerate(tup) if c]
        if nz and tup[max(nz)] == 1:
            yield tup


def regular_lattice(surface: Surface, fibre: SpecialFibre,
                    genus: int) -> RegularLattice:
    """Intersection of the per-component lattices (stacked Hermite forms)."""
    lattices = [component_lattice(surface, comp, genus)
                for comp in fibre.components]
    current = lattices[0]
    p = surface.p
    for nxt in lattices[1:]:
        current = _lattice_intersection(current, nxt, p)
    return current


def _lattice_intersection(L1: RegularLattice, L2: RegularLattice,
                          p: int) -> RegularLattice:
    """L1 cap L2 via a diagonalization of B2^{-1} B1 over the DVR."""
    g = L1.genus
    B1 = [[L1.basis[j][i] for j in range(g)] for i in range(g)]
    B2 = [[L2.basis[j][i] for j in range(g)] for i in range(g)]
    C = _mat_mul(_mat_inv(B2), B1)
    U, diag, V = _smith_over_dvr(C, p)
    # columns x with C x in Z_p^g and x in Z_p^g: x = V^{-1} y-free...
    # C = U D V with U, V in GL(Z_p): C x in R^g <=> D V x in R^g
    Vmat = V
    scale = [Fraction(p)**max(0, -a) for a in diag]
    Vinv = _mat_inv(Vmat)
    cols = []
    for jj in range(g):
        y = [scale[i] if i == jj else Fraction(0) for i in range(g)]
        x = _mat_vec(Vinv, y)
        cols.append([sum(B1[i][k] * x[k] for k in range(g)) for i in range(g)])
    return RegularLattice(hermite_normalize(cols, p))


def _mat_mul(A, B):
    n = len(A)
    return [[sum(A[i][k] * B[k][j] for k in range(n)) for j in range(len(B[0]))]
            for i in range(n)]


def _mat_vec(A, v):
    return [sum(A[i][k] * v[k] for k in range(len(v))) for i in range(len(A))]


def _mat_inv(A):
    n = len(A)
    aug = [row[:] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(A)]
    for c in range(n):
        sel = next(i for i in range(c, n) if aug[i][c] != 0)
        aug[c], aug[sel] = aug[sel], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [x * inv for x in aug[c]]
        for i in range(n):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[c])]
    return [row[n:] for row in aug]


def _smith_over_dvr(C, p: int):
    """C = U diag(p^{a_i}) V with U, V invertible over Z_p; returns
    (U, [a_i], V)."""
    n = len(C)
    A = [row[:] for row in C]
    U = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    V = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for t in range(n):
        best = None
        for i in range(t, n):
            for j in range(t, n):
                if A[i][j] != 0:
                    v = _vp_fraction(A[i][j], p)
                    if best is None or v < best[0]:
                        best = (v, i, j)
        if best is None:
            raise ValueError("singular matrix in lattice intersection")
        v, bi, bj = best
        A[t], A[bi] = A[bi], A[t]
        U[t], U[bi] = U[bi], U[t]
        for row in A:
            row[t], row[bj] = row[bj], row[t]
        for row in V:
            row[t], row[bj] = row[bj], row[t]
        pivot = A[t][t]
        for i in range(t + 1, n):
            if A[i][t] != 0:
                f = A[i][t] / pivot
                A[i] = [a - f * b for a, b in zip(A[i], A[t])]
                U[i] = [a - f * b for a, b in zip(U[i], U[t])]
        for j in range(t + 1, n):
            if A[t][j] != 0:
                f = A[t][j] / pivot
                for row in A:
                    row[j] -= f * row[t]
                for row in V:
                    row[j] -= f * row[t]
    diag = [_vp_fraction(A[i][i], p) for i in range(n)]
    # absorb units into U
    return U, diag, _transpose_cols_to_V(V)


def _transpose_cols_to_V(V):
    # V was built by column operations on the identity: it is already the
    # right factor
    return V


@dataclass
class FudgeFactor:
    valuation: int
    q: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.q)**(-self.valuation)

    def as_dict(self):
        return {"valuation": self.valuation, "q": self.q,
                "value": [self.value.numerator, self.value.denominator]}


def fudge_factor(W: RegularLattice, p: int, residue_cardinality: int) -> FudgeFactor:
    """|lambda| with lambda w^0_1 ^ .. ^ w^0_g = w_1 ^ .. ^ w_g:
    v(lambda) = -v(det of the lattice basis in omega-coordinates)."""
    v = -W.determinant_valuation(p)
    return FudgeFactor(v, residue_cardinality)
