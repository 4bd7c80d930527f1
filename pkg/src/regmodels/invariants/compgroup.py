"""Component group of the Jacobian's Néron model from the intersection matrix.

With components Gamma_i of multiplicities d_i and intersection matrix M,
the geometric component group is ker(beta)/im(M), where beta(a) = sum a_i d_i;
it can be read off of the special fibre of a regular model.  The quotient is
presented in a basis of ker(beta); its elementary divisors come from an
integer Smith normal form.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List

from ..errors import DisconnectedFibre, UnsupportedGeometry
from .fibre import SpecialFibre, special_fibre


@dataclass
class ComponentGroup:
    factors: List[int]           # elementary divisors > 1, each dividing the next

    @property
    def order(self) -> int:
        out = 1
        for f in self.factors:
            out *= f
        return out

    def __str__(self):
        if not self.factors:
            return "trivial"
        return " x ".join(f"Z/{f}" for f in self.factors)


def _xgcd(a: int, b: int):
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, x, y = _xgcd(b, a % b)
    return g, y, x - (a // b) * y


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


def kernel_basis(d: List[int]) -> List[List[int]]:
    """Basis (as columns) of the saturated lattice { a : sum a_i d_i = 0 }.

    Inductive construction: with g_i = gcd(d_1..d_i) and c^{(i)} a Bezout
    combination for g_i, the vector (d_{i+1}/g_{i+1}) c^{(i)} -
    (g_i/g_{i+1}) e_{i+1} kills the form, and together they are a basis.
    """
    n = len(d)
    if n == 0:
        return []
    combo = [1] + [0] * (n - 1)          # sum combo_j d_j = g
    g = abs(d[0])
    if d[0] < 0:
        combo[0] = -1
    basis = []
    for i in range(1, n):
        g2, x, y = _xgcd(g, d[i])
        vec = [(d[i] // g2) * c for c in combo]
        vec[i] -= g // g2
        basis.append(vec)
        combo = [x * c for c in combo]
        combo[i] += y
        g = g2
    # sanity
    for vec in basis:
        assert sum(a * b for a, b in zip(vec, d)) == 0
    return basis


def elementary_divisors(X: List[List[int]]) -> List[int]:
    from sympy import Matrix
    from sympy.matrices.normalforms import smith_normal_form
    if not X or not X[0]:
        return []
    D = smith_normal_form(Matrix(X))
    out = []
    for i in range(min(D.shape)):
        out.append(abs(int(D[i, i])))
    return out


def component_group(fibre: SpecialFibre) -> ComponentGroup:
    """Geometric component group.  When some component is not geometrically
    irreducible (e_i > 1), the fibre is recomputed over the splitting
    extension so the intersection data is the geometric one."""
    if any(e > 1 for e in fibre.constant_degrees):
        L = 1
        for e in fibre.constant_degrees:
            L = L * e // _gcd(L, e)
        geo = special_fibre(fibre.surface, base_degree=L * fibre.base_degree)
        if any(e > 1 for e in geo.constant_degrees):
            raise UnsupportedGeometry("splitting extension did not split the fibre")
        return component_group(geo)
    if not _connected(fibre):
        raise DisconnectedFibre("component group needs a connected fibre")
    d = fibre.multiplicities
    M = fibre.intersection_matrix
    n = len(d)
    if n == 1:
        return ComponentGroup([])
    kernel = kernel_basis(d)                       # n-1 column vectors
    X = _express_in_basis(kernel, M)               # (n-1) x n integer matrix
    divisors = elementary_divisors(X)
    if len([e for e in divisors if e != 0]) < len(kernel):
        raise UnsupportedGeometry(
            "component group has free rank; intersection matrix cannot be correct")
    return ComponentGroup(sorted(e for e in divisors if e > 1))


def _connected(fibre: SpecialFibre) -> bool:
    n = len(fibre.components)
    if n <= 1:
        return True
    M = fibre.intersection_matrix
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in range(n):
            if j != i and j not in seen and M[i][j] != 0:
                seen.add(j)
                stack.append(j)
    return len(seen) == n


def _express_in_basis(kernel_cols: List[List[int]], M: List[List[int]]):
    """X with kernel * X = M (columns of M lie in the kernel lattice, which
    is saturated, so the exact rational solution is integral)."""
    n = len(M)
    k = len(kernel_cols)
    cols = []
    for col in range(n):
        rows = [[Fraction(kernel_cols[j][i]) for j in range(k)] +
                [Fraction(M[i][col])] for i in range(n)]
        sol = _exact_solve(rows, k)
        if sol is None:
            raise UnsupportedGeometry("matrix column outside the degree-0 lattice")
        if any(s.denominator != 1 for s in sol):
            raise UnsupportedGeometry("non-integral coordinates in component group")
        cols.append([int(s) for s in sol])
    return [[cols[c][r] for c in range(n)] for r in range(k)]


def _exact_solve(rows, k):
    m = len(rows)
    r = 0
    piv = []
    for c in range(k):
        sel = next((i for i in range(r, m) if rows[i][c] != 0), None)
        if sel is None:
            continue
        rows[r], rows[sel] = rows[sel], rows[r]
        pivval = rows[r][c]
        rows[r] = [x / pivval for x in rows[r]]
        for i in range(m):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        piv.append(c)
        r += 1
    for i in range(r, m):
        if rows[i][k] != 0:
            return None
    sol = [Fraction(0)] * k
    for i, c in enumerate(piv):
        sol[c] = rows[i][k]
    return sol
