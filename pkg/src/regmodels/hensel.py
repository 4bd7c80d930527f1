"""Multivariate Hensel/Newton solving over pi-adically truncated rings.

The system lives in n unknowns over the ring A = (Z/p^M)[ambient vars]
(ambient-variable polynomials act as scalars; the pi-adic completion of
R[x_1..x_k] mod pi^M is exactly this polynomial ring).  After the change of
variables that normalizes the Jacobian at the approximate solution to the
identity, the iteration is a_{m+1} = a_m - F(a_m); each step improves the
defect by one power of pi, so at most M - d + 1 steps are needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

from .algebra.poly import PadicPoly
from .errors import PrecisionExhausted, RegModelsError


class HenselError(RegModelsError):
    exit_code = 3


@dataclass
class HenselProblem:
    system: List[PadicPoly]          # n polynomials
    unknowns: List[str]              # n unknown variable names
    approximation: List[PadicPoly]   # elements of A (ambient polynomials)
    defect: int                      # F(a) == 0 mod pi^defect

    def __post_init__(self):
        if len(self.system) != len(self.unknowns) or len(self.system) != len(self.approximation):
            raise ValueError("need as many equations as unknowns and approximations")
        if self.defect < 1:
            raise HenselError("defect must be >= 1")


def _subs_map(unknowns: Sequence[str], values: Sequence[PadicPoly]):
    return dict(zip(unknowns, values))


def _evaluate(system, unknowns, values):
    m = _subs_map(unknowns, values)
    return [f.substitute(m) for f in system]


def _jacobian(system, unknowns, values):
    m = _subs_map(unknowns, values)
    return [[f.partial(u).substitute(m) for u in unknowns] for f in system]


def _matrix_inverse(rows: List[List[PadicPoly]]):
    """Inverse of a matrix of unit determinant over (Z/p^M)[vars]."""
    n = len(rows)
    det = _det(rows)
    det_inv = det.inverse_unit()
    if n == 1:
        return [[det_inv]]
    adj = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [r[:j] + r[j + 1:] for k, r in enumerate(rows) if k != i]
            cof = _det(minor)
            if (i + j) % 2:
                cof = -cof
            adj[j][i] = cof * det_inv
    return adj


def _det(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = None
    for j in range(n):
        minor = _det([r[:j] + r[j + 1:] for r in rows[1:]])
        term = rows[0][j] * minor
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


def _mat_vec(rows, vec):
    out = []
    for row in rows:
        acc = None
        for a, b in zip(row, vec):
            t = a * b
            acc = t if acc is None else acc + t
        out.append(acc)
    return out


def residual_valuation(values: List[PadicPoly]):
    vals = [v.min_coeff_valuation() for v in values]
    vals = [v for v in vals if v is not None]
    return min(vals) if vals else None   # None = zero mod p^M


def hensel_solve(problem: HenselProblem, target_precision: int) -> List[PadicPoly]:
    """Solve F(b) == 0 mod pi^M with b == a mod pi^d.

    Follows the proof construction: pre-multiply once by the inverse
    Jacobian at a (so the effective Jacobian is the identity) and iterate
    a_{m+1} = a_m - F(a_m).
    """
    F, unknowns, a = problem.system, problem.unknowns, problem.approximation
    M = target_precision
    p = F[0].p

    res0 = _evaluate(F, unknowns, a)
    v0 = residual_valuation(res0)
    if v0 is not None and v0 < problem.defect:
        raise HenselError(
            f"defect violated: F(a) has valuation {v0} < {problem.defect}")
    if v0 is None:
        return [x.truncate(M) for x in a]

    J = _jacobian(F, unknowns, a)
    try:
        J_inv = _matrix_inverse(J)
    except PrecisionExhausted as exc:
        raise HenselError(f"jacobian not invertible at the approximation: {exc}")

    # G(X) = F(J^{-1} X + a): unknowns X with identity Jacobian at 0.
    fresh = [PadicPoly.var(u, p, M) for u in unknowns]
    shifted_args = [s + t for s, t in zip(_mat_vec(J_inv, fresh), a)]
    G = _evaluate(F, unknowns, shifted_args)

    x = [PadicPoly.zero(p, M) for _ in unknowns]
    for _ in range(M + 1):
        r = _evaluate(G, unknowns, x)
        if residual_valuation(r) is None:
            break
        x = [xi - ri for xi, ri in zip(x, r)]
    else:
        raise HenselError("iteration budget exceeded without reaching the cap")

    b = [s + t for s, t in zip(_mat_vec(J_inv, x), a)]
    b = [bi.truncate(M) for bi in b]
    final = _evaluate(F, unknowns, b)
    if residual_valuation(final) is not None:
        raise HenselError("returned point is not a root mod pi^M")
    return b


def hensel_solve_univariate(f: PadicPoly, name: str, a: int, M: int) -> int:
    """Classical one-variable lift used as an independent oracle in tests."""
    p = f.p
    cur = a % p**M
    fp = f.partial(name)
    for _ in range(M + 2):
        val = f.substitute({name: PadicPoly.constant(cur, p, M)}).constant_value()
        if val.is_zero():
            return cur
        der = fp.substitute({name: PadicPoly.constant(cur, p, M)}).constant_value()
        cur = (cur - val.residue * der.inverse().residue) % p**M
    raise HenselError("univariate lift did not converge")
