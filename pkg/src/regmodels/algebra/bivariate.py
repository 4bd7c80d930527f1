"""Bivariate polynomials over F_q and their factorization.

Factorization follows the classical specialize / Hensel-lift / recombine
scheme over F_q[[x]][y], with content extraction and characteristic-p
squarefree handling (p-th roots, variable swaps for y-inseparable parts).
Everything is deterministic; factors are returned in a canonical order
with a canonical scalar normalization.
"""

from __future__ import annotations

from itertools import combinations
from typing import Dict, List, Tuple

from ..errors import DegreeBoundExceeded
from .finitefield import (FFElem, FiniteField, factor_univariate, poly_deg,
                          poly_derivative, poly_divmod, poly_eval, poly_gcd,
                          poly_monic, poly_mul, poly_scalar, poly_sub,
                          poly_trim, poly_xgcd)


class BiPoly:
    """Polynomial in two named variables with FFElem coefficients."""

    __slots__ = ("F", "xname", "yname", "terms")

    def __init__(self, F: FiniteField, xname: str, yname: str,
                 terms: Dict[Tuple[int, int], FFElem]):
        self.F = F
        self.xname = xname
        self.yname = yname
        self.terms = {k: v for k, v in terms.items() if not F.is_zero(v)}

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_int_terms(F, xname, yname, terms: Dict[Tuple[int, int], int]) -> "BiPoly":
        return BiPoly(F, xname, yname, {k: F.from_int(v) for k, v in terms.items()})

    @staticmethod
    def constant(F, xname, yname, c: FFElem) -> "BiPoly":
        return BiPoly(F, xname, yname, {(0, 0): c})

    # -- structure -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(k == (0, 0) for k in self.terms)

    def deg_x(self) -> int:
        return max((i for i, _ in self.terms), default=0)

    def deg_y(self) -> int:
        return max((j for _, j in self.terms), default=0)

    def total_degree(self) -> int:
        return max((i + j for i, j in self.terms), default=0)

    def __eq__(self, other):
        return (isinstance(other, BiPoly) and self.terms == other.terms
                and {self.xname, self.yname} == {other.xname, other.yname}
                and (self.xname == other.xname or self.deg_x() == 0 == other.deg_x()))

    def __hash__(self):
        return hash((self.xname, self.yname, frozenset(self.terms.items())))

    def canonical_key(self):
        return tuple(sorted(self.terms.items()))

    # -- arithmetic -----------------------------------------------------------

    def _binop(self, other, fn):
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = fn(terms.get(k, self.F.zero), v)
        for k in [k for k, v in terms.items() if self.F.is_zero(v)]:
            del terms[k]
        return BiPoly(self.F, self.xname, self.yname, terms)

    def __add__(self, other):
        return self._binop(other, self.F.add)

    def __sub__(self, other):
        return self._binop(other, lambda a, b: self.F.sub(a, b))

    def __mul__(self, other):
        F = self.F
        terms: Dict[Tuple[int, int], FFElem] = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                k = (i1 + i2, j1 + j2)
                prod = F.mul(c1, c2)
                terms[k] = F.add(terms[k], prod) if k in terms else prod
        return BiPoly(F, self.xname, self.yname, terms)

    def scale(self, c: FFElem) -> "BiPoly":
        return BiPoly(self.F, self.xname, self.yname,
                      {k: self.F.mul(v, c) for k, v in self.terms.items()})

    def __pow__(self, n: int) -> "BiPoly":
        out = BiPoly.constant(self.F, self.xname, self.yname, self.F.one)
        for _ in range(n):
            out = out * self
        return out

    # -- views ------------------------------------------------------------------

    def y_coeffs(self) -> List[List[FFElem]]:
        """Entry j is the coefficient of y^j, as an x-polynomial list."""
        out: List[List[FFElem]] = [[] for _ in range(self.deg_y() + 1)]
        for (i, j), c in self.terms.items():
            col = out[j]
            while len(col) <= i:
                col.append(self.F.zero)
            col[i] = c
        return [poly_trim(self.F, col) for col in out]

    @staticmethod
    def from_y_coeffs(F, xname, yname, cols) -> "BiPoly":
        terms = {}
        for j, col in enumerate(cols):
            for i, c in enumerate(col):
                if not F.is_zero(c):
                    terms[(i, j)] = c
        return BiPoly(F, xname, yname, terms)

    def swap(self) -> "BiPoly":
        return BiPoly(self.F, self.yname, self.xname,
                      {(j, i): c for (i, j), c in self.terms.items()})

    def eval_x(self, a: FFElem) -> List[FFElem]:
        """Univariate polynomial in y obtained by x := a."""
        out = [self.F.zero] * (self.deg_y() + 1)
        for (i, j), c in self.terms.items():
            out[j] = self.F.add(out[j], self.F.mul(c, self.F.pow(a, i)))
        return poly_trim(self.F, out)

    def eval_point(self, a: FFElem, b: FFElem) -> FFElem:
        out = self.F.zero
        for (i, j), c in self.terms.items():
            out = self.F.add(out, self.F.mul(c, self.F.mul(self.F.pow(a, i),
                                                           self.F.pow(b, j))))
        return out

    def partial_x(self) -> "BiPoly":
        return BiPoly(self.F, self.xname, self.yname,
                      {(i - 1, j): self.F.mul(c, self.F.from_int(i))
                       for (i, j), c in self.terms.items() if i})

    def partial_y(self) -> "BiPoly":
        return BiPoly(self.F, self.xname, self.yname,
                      {(i, j - 1): self.F.mul(c, self.F.from_int(j))
                       for (i, j), c in self.terms.items() if j})

    def shift_x(self, a: FFElem) -> "BiPoly":
        """Substitute x := x + a."""
        F = self.F
        out: Dict[Tuple[int, int], FFElem] = {}
        for (i, j), c in self.terms.items():
            # binomial expansion of (x + a)^i
            row = [F.one]
            for _ in range(i):
                new = [F.mul(row[0], a)]
                for k in range(1, len(row)):
                    new.append(F.add(row[k - 1], F.mul(row[k], a)))
                new.append(F.one)
                row = new
            for k, b in enumerate(row):
                key = (k, j)
                val = F.mul(c, b)
                out[key] = F.add(out[key], val) if key in out else val
        return BiPoly(F, self.xname, self.yname, out)

    def map_into(self, bigger: FiniteField, phi) -> "BiPoly":
        return BiPoly(bigger, self.xname, self.yname,
                      {k: phi(v) for k, v in self.terms.items()})

    def normalized(self) -> "BiPoly":
        """Scale so the graded-lex leading coefficient is 1."""
        if self.is_zero():
            return self
        lead = max(self.terms, key=lambda k: (k[0] + k[1], k))
        return self.scale(self.F.inv(self.terms[lead]))

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for (i, j), c in sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]),
                                reverse=True):
            mono = []
            if i:
                mono.append(f"{self.xname}^{i}" if i > 1 else self.xname)
            if j:
                mono.append(f"{self.yname}^{j}" if j > 1 else self.yname)
            lead = "*".join(mono)
            bits.append(f"{c}*{lead}" if lead else f"{c}")
        return " + ".join(bits)


# ---------------------------------------------------------------------------
# the rational function field F_q(x) as a generic field for poly_* helpers
# ---------------------------------------------------------------------------

class RationalFunctionField:
    """Fractions of F_q[x] with the same interface FiniteField exposes."""

    def __init__(self, F: FiniteField):
        self.base = F
        self.zero = ((), ( F.one,))
        self.one = ((F.one,), (F.one,))
        self.p = F.p

    def _norm(self, num, den):
        F = self.base
        num, den = poly_trim(F, list(num)), poly_trim(F, list(den))
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            return ((), (F.one,))
        g = poly_gcd(F, num, den)
        if poly_deg(g) >= 1:
            num = poly_divmod(F, num, g)[0]
            den = poly_divmod(F, den, g)[0]
        c = F.inv(den[-1])
        num = poly_scalar(F, num, c)
        den = poly_scalar(F, den, c)
        return (tuple(num), tuple(den))

    def from_poly(self, num) -> tuple:
        return self._norm(list(num), [self.base.one])

    def from_int(self, n: int) -> tuple:
        return self.from_poly([self.base.from_int(n)])

    def is_zero(self, a) -> bool:
        return not a[0]

    def add(self, a, b):
        F = self.base
        num = poly_sub(F, poly_mul(F, list(a[0]), list(b[1])),
                       poly_scalar(F, poly_mul(F, list(b[0]), list(a[1])), F.neg(F.one)))
        return self._norm(num, poly_mul(F, list(a[1]), list(b[1])))

    def neg(self, a):
        F = self.base
        return (tuple(poly_scalar(F, list(a[0]), F.neg(F.one))), a[1])

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        F = self.base
        return self._norm(poly_mul(F, list(a[0]), list(b[0])),
                          poly_mul(F, list(a[1]), list(b[1])))

    def inv(self, a):
        if self.is_zero(a):
            raise ZeroDivisionError
        return self._norm(list(a[1]), list(a[0]))

    def pow(self, a, n):
        out = self.one
        for _ in range(n):
            out = self.mul(out, a)
        return out


def _to_fraction_ycoeffs(K: RationalFunctionField, f: BiPoly):
    return poly_trim(K, [K.from_poly(col) for col in f.y_coeffs()])


def _from_fraction_ycoeffs(F: FiniteField, xname, yname, coeffs) -> BiPoly:
    """Clear denominators and return the primitive (in y) integral polynomial."""
    lcm = [F.one]
    for num, den in coeffs:
        g = poly_gcd(F, lcm, list(den))
        extra = poly_divmod(F, list(den), g)[0]
        lcm = poly_mul(F, lcm, extra)
    cols = []
    for num, den in coeffs:
        mult = poly_divmod(F, lcm, list(den))[0]
        cols.append(poly_mul(F, list(num), mult))
    out = BiPoly.from_y_coeffs(F, xname, yname, cols)
    return _primitive_part_y(out)[0]


def _content_y(f: BiPoly):
    F = f.F
    cont: List[FFElem] = []
    for col in f.y_coeffs():
        if col:
            cont = poly_gcd(F, cont, col) if cont else poly_monic(F, col)
        if poly_deg(cont) == 0 and cont:
            break
    return cont if cont else [F.one]


def _primitive_part_y(f: BiPoly):
    """Return (primitive part, content polynomial in x)."""
    F = f.F
    cont = _content_y(f)
    if poly_deg(cont) == 0:
        return f, cont
    cols = [poly_divmod(F, col, cont)[0] if col else [] for col in f.y_coeffs()]
    return BiPoly.from_y_coeffs(F, f.xname, f.yname, cols), cont


def bi_divmod(f: BiPoly, g: BiPoly):
    """Division with remainder in F_q(x)[y]; remainder is returned cleared."""
    K = RationalFunctionField(f.F)
    a = _to_fraction_ycoeffs(K, f)
    b = _to_fraction_ycoeffs(K, g)
    q, r = poly_divmod(K, a, b)
    return q, r


def bi_exact_div(f: BiPoly, g: BiPoly):
    """f / g in F_q[x,y] or None when g does not divide f."""
    q, r = bi_divmod(f, g)
    if poly_trim(RationalFunctionField(f.F), r):
        return None
    quot = _from_fraction_ycoeffs(f.F, f.xname, f.yname, q)
    # fix the content: f = quot * g up to an x-polynomial factor
    prod = quot * g
    cf, cg = _content_y(f), _content_y(prod)
    if poly_deg(cf) >= poly_deg(cg):
        mult, rem = poly_divmod(f.F, cf, cg)
        if rem:
            return None
        quot = BiPoly.from_y_coeffs(f.F, f.xname, f.yname,
                                    [poly_mul(f.F, col, mult) for col in quot.y_coeffs()])
        prod = quot * g
    if prod.terms != f.terms:
        # scalar adjustment
        k = next(iter(f.terms))
        if k not in prod.terms:
            return None
        c = f.F.mul(f.terms[k], f.F.inv(prod.terms[k]))
        quot = quot.scale(c)
        if (quot * g).terms != f.terms:
            return None
    return quot


# ---------------------------------------------------------------------------
# truncated power series F_q[x]/(x^K) as a coefficient ring for Hensel lifting
# ---------------------------------------------------------------------------

class _SeriesRing:
    def __init__(self, F: FiniteField, K: int):
        self.base = F
        self.K = K
        self.zero = ()
        self.one = (F.one,)
        self.p = F.p

    def _trim(self, a):
        a = list(a[: self.K])
        while a and self.base.is_zero(a[-1]):
            a.pop()
        return tuple(a)

    def from_poly(self, coeffs):
        return self._trim(list(coeffs))

    def from_int(self, n):
        return self._trim([self.base.from_int(n)])

    def is_zero(self, a):
        return not a

    def add(self, a, b):
        F = self.base
        n = max(len(a), len(b))
        return self._trim([F.add(a[i] if i < len(a) else F.zero,
                                 b[i] if i < len(b) else F.zero) for i in range(n)])

    def neg(self, a):
        return tuple(self.base.neg(x) for x in a)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        F = self.base
        out = [F.zero] * min(self.K, len(a) + len(b) - 1 if a and b else 0)
        for i, x in enumerate(a):
            if F.is_zero(x):
                continue
            for j, y in enumerate(b):
                if i + j >= self.K:
                    break
                out[i + j] = F.add(out[i + j], F.mul(x, y))
        return self._trim(out)

    def inv(self, a):
        F = self.base
        if not a or F.is_zero(a[0]):
            raise ZeroDivisionError("non-unit series")
        c0inv = F.inv(a[0])
        out = [c0inv] + [F.zero] * (self.K - 1)
        for k in range(1, self.K):
            s = F.zero
            for i in range(1, min(k, len(a) - 1) + 1):
                s = F.add(s, F.mul(a[i], out[k - i]))
            out[k] = F.neg(F.mul(s, c0inv))
        return self._trim(out)


# ---------------------------------------------------------------------------
# factorization
# ---------------------------------------------------------------------------

def factor_bivariate(f: BiPoly) -> List[Tuple[BiPoly, int]]:
    """Factor into irreducibles over F_q; returns [(factor, multiplicity)].

    Factors are normalized (graded-lex leading coefficient 1) and sorted by
    (total degree, canonical term key); the overall unit is dropped.
    """
    out: Dict[BiPoly, int] = {}
    _factor_rec(f, 1, out)
    items = [(g, m) for g, m in out.items()]
    items.sort(key=lambda gm: (gm[0].total_degree(), gm[0].canonical_key()))
    return items


def _record(out, g: BiPoly, mult: int):
    g = g.normalized()
    out[g] = out.get(g, 0) + mult


def _factor_rec(f: BiPoly, mult: int, out: Dict[BiPoly, int]):
    F = f.F
    if f.is_zero():
        raise ValueError("cannot factor the zero polynomial")
    if f.is_constant():
        return
    if f.deg_y() == 0:
        for g, m in factor_univariate(F, [f.terms.get((i, 0), F.zero)
                                          for i in range(f.deg_x() + 1)]):
            _record(out, BiPoly.from_y_coeffs(F, f.xname, f.yname, [list(g)]),
                    m * mult)
        return
    if f.deg_x() == 0:
        for g, m in factor_univariate(F, [f.terms.get((0, j), F.zero)
                                          for j in range(f.deg_y() + 1)]):
            terms = {(0, j): c for j, c in enumerate(g)}
            _record(out, BiPoly(F, f.xname, f.yname, terms), m * mult)
        return

    f, cont = _primitive_part_y(f)
    if poly_deg(cont) >= 1:
        for g, m in factor_univariate(F, cont):
            _record(out, BiPoly.from_y_coeffs(F, f.xname, f.yname, [list(g)]), m * mult)
    if f.is_constant():
        return

    fy = f.partial_y()
    if fy.is_zero():
        fx = f.partial_x()
        if fx.is_zero():
            # perfect p-th power: take the p-th root coefficient-wise
            root = BiPoly(F, f.xname, f.yname,
                          {(i // F.p, j // F.p): F.pth_root(c)
                           for (i, j), c in f.terms.items()})
            _factor_rec(root, mult * F.p, out)
            return
        # inseparable in y only: factor with the roles of x and y swapped
        swapped: Dict[BiPoly, int] = {}
        _factor_rec(f.swap(), mult, swapped)
        for g, m in swapped.items():
            _record(out, g.swap(), m)
        return

    g = _bi_gcd(f, fy)
    s = bi_exact_div(f, g) if g.total_degree() >= 1 else f
    if s is None:
        raise ArithmeticError("gcd division failed")
    rest = f
    if s.total_degree() >= 1:
        for irr in _factor_squarefree(s):
            m = 0
            while True:
                q = bi_exact_div(rest, irr)
                if q is None:
                    break
                rest = q
                m += 1
            if m:
                _record(out, irr, m * mult)
    if rest.total_degree() >= 1:
        _factor_rec(rest, mult, out)


def _bi_gcd(f: BiPoly, g: BiPoly) -> BiPoly:
    K = RationalFunctionField(f.F)
    a = _to_fraction_ycoeffs(K, f)
    b = _to_fraction_ycoeffs(K, g)
    while b:
        a, b = b, poly_divmod(K, a, b)[1]
        b = poly_trim(K, b)
    return _from_fraction_ycoeffs(f.F, f.xname, f.yname, a)


def _factor_squarefree(s: BiPoly) -> List[BiPoly]:
    """Factor a primitive, squarefree s with every factor separable in y."""
    F = s.F
    if s.deg_y() == 0 or s.total_degree() <= 1:
        return [s]
    lc = s.y_coeffs()[-1]
    n = s.deg_y()
    for a in F.elements():
        if F.is_zero(poly_eval(F, lc, a)):
            continue
        ua = s.eval_x(a)
        if poly_deg(ua) != n:
            continue
        d = poly_derivative(F, ua)
        if poly_deg(poly_gcd(F, ua, d)) == 0 and d:
            return _factor_at(s, a)
    # no good specialization in F_q; try the swapped orientation
    swapped = s.swap()
    lc = swapped.y_coeffs()[-1]
    n = swapped.deg_y()
    if n >= 1:
        for a in F.elements():
            if F.is_zero(poly_eval(F, lc, a)):
                continue
            ua = swapped.eval_x(a)
            if poly_deg(ua) != n:
                continue
            d = poly_derivative(F, ua)
            if poly_deg(poly_gcd(F, ua, d)) == 0 and d:
                return [g.swap() for g in _factor_at(swapped, a)]
    raise DegreeBoundExceeded(
        "no squarefree specialization over F_%d; extend the base field" % F.q)


def _factor_at(s: BiPoly, a: FFElem) -> List[BiPoly]:
    F = s.F
    sa = s.shift_x(a)
    u = sa.eval_x(F.zero)
    ufactors = [g for g, _ in factor_univariate(F, u)]
    if len(ufactors) == 1:
        return [s]
    K = 2 * sa.deg_x() + 1
    S = _SeriesRing(F, K)
    # monicize in y over the series ring
    cols = sa.y_coeffs()
    lc_inv = S.inv(S.from_poly(cols[-1]))
    M = [S.mul(S.from_poly(c), lc_inv) for c in cols]
    lifted = _hensel_multifactor(F, S, M, ufactors, K)

    remaining = list(range(len(lifted)))
    found: List[BiPoly] = []
    current = sa
    while len(remaining) > 1:
        hit = None
        for size in range(1, len(remaining)):
            for combo in combinations(remaining, size):
                cand = _combine(F, S, [lifted[i] for i in combo], current)
                if cand is not None:
                    hit = (combo, cand[0], cand[1])
                    break
            if hit:
                break
        if hit is None:
            # the remaining product is irreducible
            break
        combo, factor, quotient = hit
        found.append(factor)
        current = quotient
        remaining = [i for i in remaining if i not in combo]
    if current.total_degree() >= 1:
        found.append(current)
    return [g.shift_x(F.neg(a)) for g in found]


def _hensel_multifactor(F, S: _SeriesRing, M, ufactors, K: int):
    """Lift the pairwise-coprime factorization of M(0,y) x-adically to x^K.

    M is monic in y with series coefficients; ufactors are monic univariate
    polynomials over F whose product is M mod x.  Linear lifting: one series
    digit per step, distributing the error by CRT over the ufactors.
    """
    r = len(ufactors)
    # Bezout data: B_l * prod_{j != l} u_j == 1 mod u_l
    bez = []
    for l in range(r):
        others = [F.one]
        for j in range(r):
            if j != l:
                others = poly_mul(F, others, ufactors[j])
        _, _, t = poly_xgcd(F, ufactors[l], others)
        bez.append(poly_divmod(F, poly_mul(F, t, [F.one]), ufactors[l])[1])
    G = [[S.from_poly([c]) for c in u] for u in ufactors]
    for k in range(1, K):
        prod = [S.one]
        for gl in G:
            prod = _ymul(S, prod, gl)
        err = _ysub(S, M, prod)
        digit = [coef[k] if len(coef) > k else F.zero for coef in err]
        digit = poly_trim(F, digit)
        if not digit:
            continue
        for l in range(r):
            delta = poly_divmod(F, poly_mul(F, digit, bez[l]), ufactors[l])[1]
            for i, c in enumerate(delta):
                if F.is_zero(c):
                    continue
                col = list(G[l][i])
                while len(col) <= k:
                    col.append(F.zero)
                col[k] = F.add(col[k], c)
                G[l][i] = S._trim(col)
    return G


def _ymul(S, a, b):
    out = [S.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if S.is_zero(x):
            continue
        for j, y in enumerate(b):
            out[i + j] = S.add(out[i + j], S.mul(x, y))
    while out and S.is_zero(out[-1]):
        out.pop()
    return out


def _ysub(S, a, b):
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else S.zero
        y = b[i] if i < len(b) else S.zero
        out.append(S.sub(x, y))
    while out and S.is_zero(out[-1]):
        out.pop()
    return out


def _combine(F, S, factors, target: BiPoly):
    """Multiply lifted factors, restore the leading coefficient, and test
    divisibility of `target`; returns (factor, quotient) on success."""
    prod = [S.one]
    for g in factors:
        prod = _ymul(S, prod, g)
    lc = target.y_coeffs()[-1]
    lc_series = S.from_poly(lc)
    cleared = [S.mul(c, lc_series) for c in prod]
    cand = BiPoly.from_y_coeffs(F, target.xname, target.yname,
                                [list(c) for c in cleared])
    cand = _primitive_part_y(cand)[0]
    if cand.total_degree() < 1:
        return None
    quotient = bi_exact_div(target, cand)
    if quotient is None:
        return None
    return cand, quotient
