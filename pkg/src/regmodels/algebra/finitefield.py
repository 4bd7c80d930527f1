"""Finite fields F_{p^e} and univariate polynomial factorization over them.

Elements of F_{p^e} are tuples of e integers mod p (coefficients of the
class of z^i in F_p[z]/(modulus)).  All algorithms are deterministic: the
modulus is the lexicographically first monic irreducible of its degree,
and the equal-degree splitting draws trial elements from a PRNG seeded by
the polynomial being factored.
"""

from __future__ import annotations

import random
from functools import lru_cache
from typing import List, Sequence, Tuple

FFElem = Tuple[int, ...]


class FiniteField:
    """F_{p^deg} presented as F_p[z]/(modulus)."""

    def __init__(self, p: int, deg: int, modulus: Sequence[int] | None = None):
        self.p = p
        self.deg = deg
        self.q = p**deg
        if modulus is None:
            modulus = _canonical_irreducible(p, deg)
        modulus = tuple(c % p for c in modulus)
        if len(modulus) != deg + 1 or modulus[-1] != 1:
            raise ValueError("modulus must be monic of the stated degree")
        self.modulus = modulus
        self.zero: FFElem = (0,) * deg
        self.one: FFElem = tuple([1] + [0] * (deg - 1)) if deg else ()

    # -- element construction ------------------------------------------------

    def from_int(self, n: int) -> FFElem:
        return tuple([n % self.p] + [0] * (self.deg - 1))

    def from_coeffs(self, coeffs: Sequence[int]) -> FFElem:
        c = [x % self.p for x in coeffs][: self.deg]
        c += [0] * (self.deg - len(c))
        return tuple(c)

    def gen(self) -> FFElem:
        """The class of z."""
        if self.deg == 1:
            # z == -modulus[0]
            return ((-self.modulus[0]) % self.p,)
        return tuple([0, 1] + [0] * (self.deg - 2))

    def elements(self):
        """All field elements, lazily, in lexicographic coefficient order."""
        def rec(i):
            if i == self.deg:
                yield ()
                return
            for c in range(self.p):
                for rest in rec(i + 1):
                    yield (c,) + rest
        return rec(0)

    # -- arithmetic -----------------------------------------------------------

    def add(self, a: FFElem, b: FFElem) -> FFElem:
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def sub(self, a: FFElem, b: FFElem) -> FFElem:
        return tuple((x - y) % self.p for x, y in zip(a, b))

    def neg(self, a: FFElem) -> FFElem:
        return tuple((-x) % self.p for x in a)

    def mul(self, a: FFElem, b: FFElem) -> FFElem:
        p, deg = self.p, self.deg
        prod = [0] * (2 * deg - 1) if deg > 1 else [a[0] * b[0]]
        if deg > 1:
            for i, x in enumerate(a):
                if x:
                    for j, y in enumerate(b):
                        prod[i + j] += x * y
        # reduce mod modulus
        for k in range(len(prod) - 1, deg - 1, -1):
            c = prod[k] % p
            if c:
                for j in range(deg):
                    prod[k - deg + j] -= c * self.modulus[j]
            prod[k] = 0
        return tuple(prod[i] % p for i in range(deg))

    def pow(self, a: FFElem, n: int) -> FFElem:
        if n < 0:
            return self.pow(self.inv(a), -n)
        result = self.one
        base = a
        while n:
            if n & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            n >>= 1
        return result

    def inv(self, a: FFElem) -> FFElem:
        if a == self.zero:
            raise ZeroDivisionError("inverse of zero in finite field")
        return self.pow(a, self.q - 2)

    def is_zero(self, a: FFElem) -> bool:
        return all(x == 0 for x in a)

    def frobenius(self, a: FFElem) -> FFElem:
        return self.pow(a, self.p)

    def pth_root(self, a: FFElem) -> FFElem:
        return self.pow(a, self.q // self.p)

    def is_square(self, a: FFElem) -> bool:
        if self.is_zero(a):
            return True
        return self.pow(a, (self.q - 1) // 2) == self.one

    def embed_into(self, bigger: "FiniteField"):
        """Field embedding self -> bigger (self.deg must divide bigger.deg).

        Deterministic: the image of z is the first root of self.modulus in
        the bigger field's element order.
        """
        if bigger.p != self.p or bigger.deg % self.deg:
            raise ValueError("no embedding")
        if self.deg == 1:
            return lambda a: bigger.from_int(a[0])
        mod_poly = [bigger.from_int(c) for c in self.modulus]
        rts = roots(bigger, mod_poly)
        root = rts[0]
        pows = [bigger.one]
        for _ in range(self.deg - 1):
            pows.append(bigger.mul(pows[-1], root))

        def phi(a: FFElem) -> FFElem:
            out = bigger.zero
            for c, pw in zip(a, pows):
                if c:
                    out = bigger.add(out, bigger.mul(bigger.from_int(c), pw))
            return out

        return phi


@lru_cache(maxsize=None)
def _canonical_irreducible(p: int, deg: int) -> Tuple[int, ...]:
    """A fixed monic irreducible of degree deg over F_p: the first sparse
    candidate (binomial/trinomial by increasing coefficients), falling back
    to a full lexicographic scan.  Deterministic across runs."""
    if deg == 1:
        return (0, 1)
    base = FiniteField(p, 1)

    def ok(tail):
        poly = [base.from_int(c) for c in tail] + [base.one]
        return _is_irreducible_over_prime(base, poly)

    for c0 in range(1, p):
        tail = tuple([c0] + [0] * (deg - 1))
        if ok(tail):
            return tail + (1,)
    for pos in range(1, deg):
        for c1 in range(1, p):
            for c0 in range(1, p):
                tail = [c0] + [0] * (deg - 1)
                tail[pos] = c1
                if ok(tuple(tail)):
                    return tuple(tail) + (1,)
    from itertools import product
    for tail in product(range(p), repeat=deg):
        if ok(tail):
            return tuple(tail) + (1,)
    raise RuntimeError("unreachable: irreducible polynomial must exist")


def _is_irreducible_over_prime(F: FiniteField, poly) -> bool:
    d = poly_deg(poly)
    if d < 1 or F.is_zero(poly[0]) and d > 1 and all(F.is_zero(c) for c in poly[:-1]):
        pass
    x = [F.zero, F.one]
    # Rabin: x^(p^d) == x mod poly, and gcd(x^(p^(d/l)) - x, poly) == 1.
    xq = poly_powmod(F, x, F.q**d, poly)
    if poly_trim(F, poly_sub(F, xq, x)):
        return False
    for ell in _prime_divisors(d):
        xql = poly_powmod(F, x, F.q**(d // ell), poly)
        g = poly_gcd(F, poly_sub(F, xql, x), poly)
        if poly_deg(g) != 0:
            return False
    return True


def _prime_divisors(n: int):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


# ---------------------------------------------------------------------------
# dense univariate polynomials over a FiniteField: little-endian element lists
# ---------------------------------------------------------------------------

def poly_trim(F: FiniteField, a: List[FFElem]) -> List[FFElem]:
    while a and F.is_zero(a[-1]):
        a.pop()
    return a


def poly_deg(a) -> int:
    return len(a) - 1


def poly_add(F, a, b):
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else F.zero
        y = b[i] if i < len(b) else F.zero
        out.append(F.add(x, y))
    return poly_trim(F, out)


def poly_sub(F, a, b):
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else F.zero
        y = b[i] if i < len(b) else F.zero
        out.append(F.sub(x, y))
    return poly_trim(F, out)


def poly_neg(F, a):
    return [F.neg(x) for x in a]


def poly_mul(F, a, b):
    if not a or not b:
        return []
    out = [F.zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if F.is_zero(x):
            continue
        for j, y in enumerate(b):
            out[i + j] = F.add(out[i + j], F.mul(x, y))
    return poly_trim(F, out)


def poly_scalar(F, a, c):
    return poly_trim(F, [F.mul(x, c) for x in a])


def poly_divmod(F, a, b):
    b = poly_trim(F, list(b))
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    db, lb = poly_deg(b), b[-1]
    lb_inv = F.inv(lb)
    q = [F.zero] * max(0, len(a) - db)
    while poly_deg(poly_trim(F, a)) >= db and a:
        da = poly_deg(a)
        c = F.mul(a[-1], lb_inv)
        q[da - db] = c
        for i in range(db + 1):
            a[da - db + i] = F.sub(a[da - db + i], F.mul(c, b[i]))
        a = poly_trim(F, a)
    return poly_trim(F, q), a


def poly_mod(F, a, b):
    return poly_divmod(F, a, b)[1]


def poly_gcd(F, a, b):
    a, b = poly_trim(F, list(a)), poly_trim(F, list(b))
    while b:
        a, b = b, poly_mod(F, a, b)
    if a:
        a = poly_scalar(F, a, F.inv(a[-1]))
    return a


def poly_xgcd(F, a, b):
    """Extended gcd: returns (g, s, t) with s*a + t*b = g, g monic."""
    r0, r1 = poly_trim(F, list(a)), poly_trim(F, list(b))
    s0, s1 = [F.one], []
    t0, t1 = [], [F.one]
    while r1:
        q, r = poly_divmod(F, r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, poly_sub(F, s0, poly_mul(F, q, s1))
        t0, t1 = t1, poly_sub(F, t0, poly_mul(F, q, t1))
    if r0:
        c = F.inv(r0[-1])
        r0, s0, t0 = poly_scalar(F, r0, c), poly_scalar(F, s0, c), poly_scalar(F, t0, c)
    return r0, s0, t0


def poly_powmod(F, a, n, m):
    result = [F.one]
    base = poly_mod(F, a, m)
    while n:
        if n & 1:
            result = poly_mod(F, poly_mul(F, result, base), m)
        base = poly_mod(F, poly_mul(F, base, base), m)
        n >>= 1
    return result


def poly_eval(F, a, x):
    out = F.zero
    for c in reversed(a):
        out = F.add(F.mul(out, x), c)
    return out


def poly_derivative(F, a):
    out = []
    for i in range(1, len(a)):
        out.append(F.mul(a[i], F.from_int(i)))
    return poly_trim(F, out)


def poly_monic(F, a):
    a = poly_trim(F, list(a))
    if not a:
        return a
    return poly_scalar(F, a, F.inv(a[-1]))


def poly_from_ints(F, coeffs) -> List[FFElem]:
    return poly_trim(F, [F.from_int(c) for c in coeffs])


# ---------------------------------------------------------------------------
# factorization
# ---------------------------------------------------------------------------

def squarefree_decomposition(F: FiniteField, f) -> List[Tuple[List[FFElem], int]]:
    """Yun-style decomposition valid in characteristic p.

    Returns [(g_i, m_i)] with f = lc * prod g_i^{m_i}, the g_i squarefree,
    monic and pairwise coprime.
    """
    f = poly_monic(F, f)
    if poly_deg(f) < 1:
        return []
    out: List[Tuple[List[FFElem], int]] = []
    df = poly_derivative(F, f)
    if not df:
        # f = h(x^p): take p-th root of coefficients
        root = [F.pth_root(f[i]) for i in range(0, len(f), F.p)]
        for g, m in squarefree_decomposition(F, root):
            out.append((g, m * F.p))
        return out
    a = poly_gcd(F, f, df)
    b = poly_divmod(F, f, a)[0]          # squarefree part away from p-th powers
    m = 1
    while poly_deg(b) >= 1:
        c = poly_gcd(F, a, b)
        piece = poly_divmod(F, b, c)[0]
        if poly_deg(piece) >= 1:
            out.append((piece, m))
        b = c
        a = poly_divmod(F, a, c)[0]
        m += 1
    if poly_deg(a) >= 1:
        # leftover p-th power part
        for g, mm in squarefree_decomposition(F, a):
            merged = False
            for i, (gi, mi) in enumerate(out):
                if gi == g:
                    out[i] = (gi, mi + mm)
                    merged = True
            if not merged:
                out.append((g, mm))
    return out


def _distinct_degree(F, f):
    """f monic squarefree -> [(product of irreducibles of degree d, d)]."""
    out = []
    x = [F.zero, F.one]
    h = list(x)
    rest = list(f)
    d = 0
    while poly_deg(rest) >= 1:
        d += 1
        if 2 * d > poly_deg(rest):
            out.append((rest, poly_deg(rest)))
            break
        h = poly_powmod(F, h, F.q, rest)
        g = poly_gcd(F, poly_sub(F, h, x), rest)
        if poly_deg(g) >= 1:
            out.append((g, d))
            rest = poly_divmod(F, rest, g)[0]
            h = poly_mod(F, h, rest)
    return out


def _poly_seed(F, f) -> int:
    bits = [F.p, F.deg]
    for c in f:
        bits.extend(c)
    return hash(tuple(bits)) & 0x7FFFFFFF


def _equal_degree(F, f, d):
    """Split monic squarefree f, all of whose factors have degree d."""
    n = poly_deg(f)
    if n == d:
        return [f]
    rng = random.Random(_poly_seed(F, f))
    exponent = (F.q**d - 1) // 2
    while True:
        a = [F.from_coeffs([rng.randrange(F.p) for _ in range(F.deg)])
             for _ in range(n)]
        a = poly_trim(F, a)
        if poly_deg(a) < 1:
            continue
        g = poly_gcd(F, a, f)
        if 1 <= poly_deg(g) < n:
            pass
        else:
            b = poly_powmod(F, a, exponent, f)
            g = poly_gcd(F, poly_sub(F, b, [F.one]), f)
            if not (1 <= poly_deg(g) < n):
                continue
        h = poly_divmod(F, f, g)[0]
        return _equal_degree(F, g, d) + _equal_degree(F, h, d)


def factor_univariate(F: FiniteField, f) -> List[Tuple[List[FFElem], int]]:
    """Full factorization into monic irreducibles with multiplicities.

    The leading coefficient is dropped (callers track units separately).
    Factors are returned sorted by (degree, coefficient tuples).
    """
    f = poly_trim(F, list(f))
    if poly_deg(f) < 1:
        return []
    out = []
    for g, m in squarefree_decomposition(F, f):
        for piece, d in _distinct_degree(F, poly_monic(F, g)):
            for irr in _equal_degree(F, piece, d):
                out.append((poly_monic(F, irr), m))
    out.sort(key=lambda gm: (poly_deg(gm[0]), [list(c) for c in gm[0]]))
    return out


def roots(F: FiniteField, f) -> List[FFElem]:
    """Roots of f in F, sorted, without multiplicity."""
    f = poly_trim(F, list(f))
    if poly_deg(f) < 1:
        return []
    # gcd with x^q - x isolates the roots in F
    xq = poly_powmod(F, [F.zero, F.one], F.q, f)
    g = poly_gcd(F, poly_sub(F, xq, [F.zero, F.one]), f)
    out = []
    for irr, _ in factor_univariate(F, g):
        if poly_deg(irr) == 1:
            out.append(F.neg(irr[0]))
    return sorted(out)
