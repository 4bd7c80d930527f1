"""Resultants and Bezout-style pi-power certificates.

The Sylvester resultant is computed over the truncated coefficient ring by
fraction-free expansion of small determinants.  Certificates expressing a
power of pi inside the ideal (f, f') come from an exact extended gcd over Q
(inputs to the automated path are exact integer polynomials), cleared to
p-integral cofactors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Tuple

from ..errors import CertificateNotFound, PrecisionExhausted, UnsupportedGeometry
from .padic import TruncatedPadic
from .poly import PadicPoly


def _det_bareiss_int(rows: List[List[int]]) -> int:
    """Exact integer determinant (Bareiss fraction-free elimination)."""
    n = len(rows)
    if n == 0:
        return 1
    m = [list(map(int, r)) for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k]), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[-1][-1]


def sylvester_matrix(f: List[int], g: List[int]) -> List[List[int]]:
    """Sylvester matrix of two little-endian coefficient lists."""
    df, dg = len(f) - 1, len(g) - 1
    n = df + dg
    rows = []
    for i in range(dg):
        row = [0] * n
        for j, c in enumerate(reversed(f)):
            row[i + j] = c
        rows.append(row)
    for i in range(df):
        row = [0] * n
        for j, c in enumerate(reversed(g)):
            row[i + j] = c
        rows.append(row)
    return rows


def resultant(f: PadicPoly, g: PadicPoly, name: str | None = None) -> TruncatedPadic:
    """Sylvester-matrix resultant of two univariate truncated polynomials."""
    if name is None:
        allvars = set(f.variables) | set(g.variables)
        if len(allvars) > 1:
            raise ValueError("resultant needs univariate operands")
        name = next(iter(allvars)) if allvars else "x"
    fc = [c.constant_value().residue for c in f.as_univariate(name)]
    gc = [c.constant_value().residue for c in g.as_univariate(name)]
    if len(fc) - 1 < 1 or len(gc) - 1 < 1:
        if len(fc) - 1 == 0 or len(gc) - 1 == 0:
            # Res(f, c) = c^{deg f}
            if len(gc) == 1:
                const, other = gc[0], len(fc) - 1
            else:
                const, other = fc[0], len(gc) - 1
            prec = min(f.precision, g.precision)
            return TruncatedPadic.from_int(pow(const, other), f.p, prec)
        raise ValueError("resultant of empty polynomial")
    prec = min(f.precision, g.precision)
    det = _det_bareiss_int(sylvester_matrix(fc, gc))
    out = TruncatedPadic.from_int(det, f.p, prec)
    if out.is_zero():
        raise PrecisionExhausted(
            "resultant vanishes mod p^%d; cannot certify a valuation" % prec)
    return out


# ---------------------------------------------------------------------------
# exact rational helpers for certificates
# ---------------------------------------------------------------------------

def _frac_trim(a):
    while a and a[-1] == 0:
        a.pop()
    return a


def _frac_divmod(a, b):
    a = [Fraction(x) for x in a]
    b = [Fraction(x) for x in b]
    q = [Fraction(0)] * max(0, len(a) - len(b) + 1)
    while _frac_trim(a) and len(a) >= len(b):
        c = a[-1] / b[-1]
        k = len(a) - len(b)
        q[k] = c
        for i in range(len(b)):
            a[k + i] -= c * b[i]
        a.pop()
    return q, a


def rational_xgcd(f: List[int], g: List[int]) -> Tuple[List[Fraction], List[Fraction], List[Fraction]]:
    """Extended Euclid over Q[x]: returns (s, t, r) with s f + t g = r, r the gcd."""
    r0 = [Fraction(c) for c in f]
    r1 = [Fraction(c) for c in g]
    s0, s1 = [Fraction(1)], []
    t0, t1 = [], [Fraction(1)]

    def mul(a, b):
        if not a or not b:
            return []
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                out[i + j] += x * y
        return _frac_trim(out)

    def sub(a, b):
        out = [Fraction(0)] * max(len(a), len(b))
        for i, x in enumerate(a):
            out[i] += x
        for i, x in enumerate(b):
            out[i] -= x
        return _frac_trim(out)

    while _frac_trim(r1):
        q, r = _frac_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, sub(s0, mul(q, s1))
        t0, t1 = t1, sub(t0, mul(q, t1))
    return s0, t0, r0


def _vp(x: Fraction | int, p: int) -> int:
    x = Fraction(x)
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


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass
class BezoutCertificate:
    """Witness that unit * pi^f0 = sum c_j f_j + sum d_alpha m_alpha."""

    f0: int
    gen_cofactors: List[PadicPoly]
    minor_cofactors: List[PadicPoly]
    unit: TruncatedPadic
    precision: int

    def verify(self, gens: List[PadicPoly], minors: List[PadicPoly]) -> bool:
        p, M = self.unit.p, self.precision
        total = PadicPoly.zero(p, M)
        for c, f in zip(self.gen_cofactors, gens):
            total = total + c * f
        for d, m in zip(self.minor_cofactors, minors):
            total = total + d * m
        target = PadicPoly.constant(self.unit.residue * p**self.f0, p, M)
        return total.congruent(target, min(M, self.precision))


def jacobian_minors(F: List[PadicPoly], names: List[str]) -> List[PadicPoly]:
    """All maximal minors of the Jacobian (d f_i / d x_j), indexed by the
    canonical (lexicographic) order of m-subsets of columns."""
    from itertools import combinations
    m, n = len(F), len(names)
    if m > n:
        raise ValueError("more equations than variables")
    W = [[f.partial(x) for x in names] for f in F]
    out = []
    for cols in combinations(range(n), m):
        out.append(_poly_det([[W[i][j] for j in cols] for i in range(m)]))
    return out


def _poly_det(rows: List[List[PadicPoly]]) -> PadicPoly:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = None
    for j in range(n):
        minor = _poly_det([r[:j] + r[j + 1:] for r in rows[1:]])
        term = rows[0][j] * minor
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


def bezout_pi_certificate(gens: List[PadicPoly], minors: List[PadicPoly],
                          working_precision: int,
                          exact_data: Tuple[List[int], str] | None = None,
                          candidate: BezoutCertificate | None = None) -> BezoutCertificate:
    """Certify that some pi^f0 (f0 < working_precision) lies in (gens) + (minors).

    Automated path: the hyperelliptic shape y^2 - f(x) with p odd, where the
    ideal reduces to (f, f') in one variable; `exact_data` carries the exact
    integer coefficient list of f and the name of its variable.  Otherwise a
    caller-supplied `candidate` certificate is verified as-is.
    """
    if candidate is not None:
        if not candidate.verify(gens, minors):
            raise CertificateNotFound("supplied certificate does not verify")
        return candidate
    if exact_data is None:
        raise UnsupportedGeometry(
            "no automated certificate path for this shape; supply cofactors")
    fcoeffs, xname = exact_data
    p = gens[0].p
    M = working_precision
    if p == 2:
        raise UnsupportedGeometry("residue characteristic 2 is not supported")

    # trivial unit-in-ideal shortcut
    for i, g in enumerate(gens + minors):
        if g.is_constant() and g.constant_value().is_unit():
            unit = g.constant_value()
            cof = [PadicPoly.zero(p, M)] * (len(gens) + len(minors))
            cof[i] = PadicPoly.constant(1, p, M)
            return BezoutCertificate(0, cof[:len(gens)], cof[len(gens):],
                                     unit.truncate(M), M)

    fprime = [c * i for i, c in enumerate(fcoeffs)][1:]
    s, t, r = rational_xgcd(fcoeffs, fprime)
    r = _frac_trim([Fraction(c) for c in r])
    if len(r) != 1:
        raise CertificateNotFound("f and f' share a factor: generic fibre not smooth")
    # s f + t f' = r0;   scale so cofactors are p-integral and r becomes
    # unit * p^{f0} with f0 minimal for this strategy
    r0 = r[0]
    worst_denominator = max([0] + [-_vp(c, p) for c in s + t if c != 0])
    scale = Fraction(p)**worst_denominator
    s = [c * scale for c in s]
    t = [c * scale for c in t]
    r0 = r0 * scale
    f0 = _vp(r0, p)
    if f0 >= M:
        raise CertificateNotFound(
            f"certified exponent {f0} is not below the precision cap {M}")
    unit_frac = r0 / Fraction(p)**f0

    def frac_to_residue(c: Fraction) -> int:
        mod = p**M
        num = c.numerator % mod
        den = c.denominator % mod
        return num * pow(den, -1, mod) % mod

    a_poly = PadicPoly.from_univariate([frac_to_residue(c) for c in s], xname, p, M)
    b_poly = PadicPoly.from_univariate([frac_to_residue(c) for c in t], xname, p, M)
    unit = TruncatedPadic.from_int(frac_to_residue(unit_frac), p, M)

    # lift the relation  a f + b f' = unit p^{f0}  into the ambient ideal
    #   (y^2 - f,  minors).  With F = y^2 - f, m1 = -f', m2 = 2y:
    #   f = y^2 - F = (y/2) (2y) - F, so
    #   unit p^{f0} = (-a) F + (-b) m1 + (a y / 2) m2.
    if len(gens) == 1 and len(minors) == 2:
        yname = next(v for v in gens[0].variables if v != xname)
        ypoly = PadicPoly.var(yname, p, M)
        inv2 = pow(2, -1, p**M)
        c_F = -a_poly
        d1 = -b_poly
        d2 = a_poly * ypoly.map_coefficients(lambda c: c * inv2)
        cert = BezoutCertificate(f0, [c_F], [d1, d2], unit, M)
    else:
        # bare univariate setting: gens = (f), minors = (f')
        cert = BezoutCertificate(f0, [a_poly], [b_poly], unit, M)
    if not cert.verify(gens, minors):
        raise CertificateNotFound("constructed certificate failed verification")
    return cert


def formal_quadratic_fold(f: PadicPoly, names: List[str], tnames: List[str]):
    """Dictionary (i, j) -> coefficient polynomial lam_{ij}(X, T) with
    f(X+T) - f(X) - sum_i df/dx_i t_i = sum_{i<=j} lam_{ij} t_i t_j.

    Every formal monomial in T of degree >= 2 is assigned to the pair of its
    two lexicographically smallest variable indices; the leftover T-powers
    stay inside lam, which is the folding of cubic and higher terms.
    """
    p, prec = f.p, f.precision
    tvars = [PadicPoly.var(t, p, prec) for t in tnames]
    shifted = f.substitute({x: PadicPoly.var(x, p, prec) + t
                            for x, t in zip(names, tvars)})
    lin = f
    for x, t in zip(names, tvars):
        lin = lin + f.partial(x) * t
    rest = shifted - lin
    lam: dict = {}
    for exps, c in rest.terms.items():
        gamma = [0] * len(tnames)
        key = [0] * len(rest.variables)
        for pos, (v, e) in enumerate(zip(rest.variables, exps)):
            if v in tnames:
                gamma[tnames.index(v)] = e
            else:
                key[pos] = e
        order = sum(gamma)
        if order < 2:
            raise ArithmeticError("linear Taylor term escaped the split")
        i = next(k for k, g in enumerate(gamma) if g)
        gamma[i] -= 1
        j = next(k for k, g in enumerate(gamma) if g)
        gamma[j] -= 1
        mono = PadicPoly(p, prec, rest.variables, {tuple(key): c})
        for k, g in enumerate(gamma):
            if g:
                mono = mono * tvars[k]**g
        lam[(i, j)] = lam.get((i, j), PadicPoly.zero(p, prec)) + mono
    return lam


def taylor_quadratic_split(F: List[PadicPoly], U: List[PadicPoly],
                           names: List[str]):
    """Split F(X+U) into linear part W U and quadratic-coefficient data.

    Returns (linear, lambdas): linear[k] = sum_i dF_k/dx_i u_i, and
    lambdas[k] maps ordered pairs (i, j), i <= j, to the coefficient
    lam^k_{ij} with F_k(X+U) = F_k + linear[k] + sum lam^k_{ij} u_i u_j
    exactly.  Cubic and higher terms are folded into the lexicographically
    smallest pair, so the lam may themselves involve the u's.
    """
    if len(U) != len(names):
        raise ValueError("one substitution per variable required")
    tnames = [f"__t{i}__" for i in range(len(names))]
    linear = []
    lambdas = []
    for f in F:
        lin = PadicPoly.zero(f.p, f.precision)
        for x, u in zip(names, U):
            lin = lin + f.partial(x) * u
        fold = formal_quadratic_fold(f, names, tnames)
        lam = {}
        subs = dict(zip(tnames, U))
        for (i, j), coeff in fold.items():
            lam[(i, j)] = coeff.substitute(subs)
        linear.append(lin)
        lambdas.append(lam)
    return linear, lambdas


def reassemble_taylor(f: PadicPoly, U: List[PadicPoly], names: List[str],
                      linear: PadicPoly, lam) -> PadicPoly:
    """F + linear + sum lam_{ij} u_i u_j, for checking the split exactly."""
    total = f + linear
    for (i, j), coeff in lam.items():
        total = total + coeff * U[i] * U[j]
    return total
