"""N-closeness of embedded models and the formal automorphisms relating them.

Two chart presentations with the same skeleton are N-close when paired
generators differ by elements of pi^N.  For hypersurface models whose
generic fibre is smooth, an automorphism sigma = (x_i -> x_i + u_i) of the
pi-adic completion carrying one ideal to the other is constructed from a
Bezout certificate pi^f = c F + sum d_a m_a: the perturbation is rewritten
through the square of that identity, the quadratic system in the unknowns
a_{alpha beta} is solved by Hensel's lemma from the approximate solution 0,
and u_i = sum_beta a_{i beta} m_beta is congruent to 0 mod pi^{N-2f}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .algebra.poly import PadicPoly
from .algebra.resultant import (BezoutCertificate, formal_quadratic_fold,
                                jacobian_minors)
from .errors import (MembershipUndecidable, PrecisionExhausted, ShapeMismatch,
                     UnsupportedGeometry)
from .hensel import HenselProblem, hensel_solve
from .model.chart import Surface


# ---------------------------------------------------------------------------
# N-closeness of models
# ---------------------------------------------------------------------------


def _paired_charts(M1: Surface, M2: Surface):
    c1 = M1.active_charts()
    c2 = M2.active_charts()
    if len(c1) != len(c2):
        raise ShapeMismatch("different numbers of active charts")
    for a, b in zip(c1, c2):
        if a.variables != b.variables or len(a.relations) != len(b.relations):
            raise ShapeMismatch(
                f"chart skeletons differ at charts {a.chart_id}/{b.chart_id}")
        for r, s in zip(a.relations, b.relations):
            if not r.congruent(s, min(r.precision, s.precision)):
                raise ShapeMismatch("ambient relations differ")
        yield a, b


def closeness_level(M1: Surface, M2: Surface):
    """Largest N <= cap with paired generators differing by pi^N elements;
    None means >= cap (indistinguishable at the working precision)."""
    best = None
    for a, b in _paired_charts(M1, M2):
        diff = a.generator - b.generator
        v = diff.min_coeff_valuation()
        if v is None:
            continue
        best = v if best is None else min(best, v)
    return best


def special_fibres_equal(M1: Surface, M2: Surface) -> bool:
    """Chart-wise equality of generator ideals mod pi (hypersurface case:
    single generators agree up to a unit of the residue field)."""
    for a, b in _paired_charts(M1, M2):
        ta = a.generator.mod_p_terms()
        tb = b.generator.mod_p_terms()
        if not ta and not tb:
            continue
        if not ta or not tb:
            return False
        la = a.generator.variables
        lb = b.generator.variables
        packed_a = {tuple((v, e) for v, e in zip(la, k) if e): c
                    for k, c in ta.items()}
        packed_b = {tuple((v, e) for v, e in zip(lb, k) if e): c
                    for k, c in tb.items()}
        if set(packed_a) != set(packed_b):
            return False
        key = next(iter(packed_a))
        p = a.p
        unit = packed_b[key] * pow(packed_a[key], -1, p) % p
        for k, c in packed_a.items():
            if packed_b[k] != c * unit % p:
                return False
    return True


def regularity_transfer_check(M1: Surface, M2: Surface, point) -> bool:
    """(M1 regular at point) <=> (M2 regular at point), by two independent
    cotangent computations; the models must be at least 2-close."""
    from .model.regularity import is_regular_at
    lvl = closeness_level(M1, M2)
    if lvl is not None and lvl < 2:
        raise ShapeMismatch("models are not 2-close")
    r1 = is_regular_at(M1.charts[point.chart_id], point)
    r2 = is_regular_at(M2.charts[point.chart_id], point)
    return r1 == r2


# ---------------------------------------------------------------------------
# formal automorphisms (hypersurface pipeline)
# ---------------------------------------------------------------------------


@dataclass
class FormalAutomorphism:
    variables: Tuple[str, ...]
    substitutions: Dict[str, PadicPoly]        # x_i -> x_i + u_i
    inverse: Dict[str, PadicPoly]              # x_i -> x_i + u~_i
    congruence_level: int                      # u_i == 0 mod pi^L
    precision: int
    witness: Dict[str, object]

    def apply(self, poly: PadicPoly) -> PadicPoly:
        return poly.substitute({v: PadicPoly.var(v, poly.p, self.precision) + u
                                for v, u in self.substitutions.items()})

    def apply_inverse(self, poly: PadicPoly) -> PadicPoly:
        return poly.substitute({v: PadicPoly.var(v, poly.p, self.precision) + u
                                for v, u in self.inverse.items()})

    def composed_with_inverse_is_identity(self) -> bool:
        p = self.precision
        for v in self.variables:
            var = PadicPoly.var(v, list(self.substitutions.values())[0].p, p)
            image = self.apply(self.apply_inverse(var))
            if not (image - var).is_zero():
                return False
        return True


def construct_automorphism(F: List[PadicPoly], G: List[PadicPoly],
                           cert: BezoutCertificate, N: int,
                           M: int, names: Optional[List[str]] = None
                           ) -> FormalAutomorphism:
    """sigma with sigma((F)) = (G) and sigma == id mod pi^{N-2f}.

    Automated path: one generator (hypersurface).  The pipeline follows the
    construction: normalize G by (I+C)^{-1}, write the difference through
    the squared certificate as sum D_ab m_a m_b, pose the quadratic system
    in the unknowns a_{alpha beta}, and solve it by Hensel from 0.
    """
    if len(F) != 1 or len(G) != 1:
        raise UnsupportedGeometry(
            "automated automorphism construction handles hypersurfaces only")
    f, g = F[0], G[0]
    p = f.p
    if names is None:
        names = sorted(set(f.variables) | set(g.variables))
    n = len(names)
    if n > 3:
        raise UnsupportedGeometry("at most 3 ambient variables are supported")
    f0 = cert.f0
    if N < 2 * f0 + 2:
        raise PrecisionExhausted(
            f"threshold violated: N = {N} < 2 f0 + 2 = {2 * f0 + 2}")
    diff = g - f
    v = diff.min_coeff_valuation()
    if v is not None and v < N:
        raise ShapeMismatch(f"generators are not {N}-close (difference has "
                            f"valuation {v})")
    minors = jacobian_minors([f], names)         # m_alpha = dF/dx_alpha
    if diff.is_zero() or v is None:
        identity = {x: PadicPoly.zero(p, M) for x in names}
        return FormalAutomorphism(tuple(names), dict(identity), dict(identity),
                                  M, M, {"trivial": True})
    if M <= N:
        raise PrecisionExhausted(
            "the cap must exceed N to carry any information about sigma")

    # delta2 = (g - f)/pi^{2 f0}: valuation >= N - 2 f0, known mod the cap
    # less 2 f0 digits.  Squaring the certificate pi^{f0} unit = c F + D_sum
    # turns it into an (F, minor-products) combination.
    delta2 = diff.divide_by_pi_power(2 * f0) if f0 else diff
    work_prec = delta2.precision
    unit_inv = cert.unit.inverse()
    delta_t = delta2 * unit_inv.residue**2       # delta2 / unit^2
    cof = cert.gen_cofactors[0]
    D_sum = PadicPoly.zero(p, work_prec)
    for d_a, m_a in zip(cert.minor_cofactors, minors):
        D_sum = D_sum + d_a * m_a
    # g = (1 + C) f + delta_t D_sum^2,  C = delta_t (cof^2 f + 2 cof D_sum)
    C = delta_t * (cof * cof * f + 2 * cof * D_sum)
    one = PadicPoly.constant(1, p, work_prec)
    inv_1C = (one + C).inverse_unit()
    # G' = F + sum_{a,b} D_ab m_a m_b with D_ab = E d_a d_b in pi^{N-2f}
    E = inv_1C * delta_t
    D: Dict[Tuple[int, int], PadicPoly] = {}
    for a, d_a in enumerate(cert.minor_cofactors):
        for b, d_b in enumerate(cert.minor_cofactors):
            D[(a, b)] = E * d_a * d_b

    # unknowns a_{alpha beta}; u_i = sum_b a_{i b} m_b
    unames = [[f"__a_{i}_{j}__" for j in range(n)] for i in range(n)]
    U = []
    for i in range(n):
        u = PadicPoly.zero(p, work_prec)
        for b in range(n):
            u = u + PadicPoly.var(unames[i][b], p, work_prec) * minors[b]
        U.append(u)
    tnames = [f"__t{i}__" for i in range(n)]
    lam = formal_quadratic_fold(f, names, tnames)
    # quadratic part lands on ordered slots (beta, delta) through
    # u_i u_j = sum a_{i beta} a_{j delta} m_beta m_delta
    Q: Dict[Tuple[int, int], PadicPoly] = {
        slot: PadicPoly.zero(p, work_prec) for slot in D}
    for (i, j), coeff in lam.items():
        lam_sub = coeff.substitute(dict(zip(tnames, U)))
        for bb in range(n):
            for dd in range(n):
                term = lam_sub * PadicPoly.var(unames[i][bb], p, work_prec) \
                    * PadicPoly.var(unames[j][dd], p, work_prec)
                Q[(bb, dd)] = Q[(bb, dd)] + term
    system = []
    unknown_list = []
    for bb in range(n):
        for dd in range(n):
            eq = PadicPoly.var(unames[bb][dd], p, work_prec) + Q[(bb, dd)] - D[(bb, dd)]
            system.append(eq)
            unknown_list.append(unames[bb][dd])
    approx = [PadicPoly.zero(p, work_prec) for _ in system]
    problem = HenselProblem(system, unknown_list, approx,
                            defect=max(1, N - 2 * f0))
    solution = hensel_solve(problem, work_prec)
    sol_map = dict(zip(unknown_list, solution))
    # the pi^{N-2f} factor lives inside D, hence inside the solved a's
    subs = {}
    for i, x in enumerate(names):
        u = PadicPoly.zero(p, work_prec)
        for b in range(n):
            u = u + sol_map[unames[i][b]] * minors[b]
        subs[x] = u.truncate(min(M, u.precision))
    sigma_prec = min(M, work_prec)
    level = min((u.min_coeff_valuation() for u in subs.values()
                 if not u.is_zero()), default=None)
    if level is None:
        level = sigma_prec
    if level < 2:
        raise UnsupportedGeometry(
            "automorphism is not congruent to the identity mod pi^2")
    inverse = _invert_substitutions(subs, names, p, sigma_prec)
    sigma = FormalAutomorphism(tuple(names), subs, inverse, level, sigma_prec,
                               {"a_solution": sol_map, "certificate": cert})
    return sigma


def _invert_substitutions(subs: Dict[str, PadicPoly], names, p: int,
                          M: int) -> Dict[str, PadicPoly]:
    """u~ with (x + u~) after (x -> x + u) giving the identity mod pi^M:
    fixed point iteration u~ <- -u(x + u~), converging since u == 0 mod pi^2."""
    inverse = {x: -u for x, u in subs.items()}
    for _ in range(M + 1):
        updated = {}
        for x in names:
            shifted = subs[x].substitute(
                {y: PadicPoly.var(y, p, M) + inverse[y] for y in names})
            updated[x] = -shifted
        if all((updated[x] - inverse[x]).is_zero() for x in names):
            inverse = updated
            break
        inverse = updated
    return inverse


def verify_ideal_transport(sigma: FormalAutomorphism, F: List[PadicPoly],
                           G: List[PadicPoly], M: int) -> bool:
    """sigma(f) in (G) + pi^M and sigma^{-1}(g) in (F) + pi^M, decided by
    exact division in the hypersurface case."""
    if len(F) != 1 or len(G) != 1:
        raise MembershipUndecidable(
            "membership needs caller cofactors for non-hypersurface ideals")
    f, g = F[0], G[0]
    return (_divides_mod(sigma.apply(f), g, M)
            and _divides_mod(sigma.apply_inverse(g), f, M))


def _divides_mod(target: PadicPoly, gen: PadicPoly, M: int) -> bool:
    """target in (gen) + pi^M, by division along a unit-leading variable."""
    prec = min(target.precision, gen.precision, M)
    target = target.truncate(prec)
    gen = gen.truncate(prec)
    if target.is_zero():
        return True
    for name in gen.variables:
        coeffs = gen.as_univariate(name)
        if not coeffs:
            continue
        try:
            coeffs[-1].inverse_unit()
        except Exception:
            continue
        try:
            _, rem = target.div_rem(gen, name)
        except (ValueError, ArithmeticError):
            continue
        return rem.is_zero()
    raise MembershipUndecidable("no unit-leading variable for exact division")
