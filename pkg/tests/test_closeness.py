"""Closeness levels, fibre equality, regularity transfer, automorphisms."""

import random

import pytest

from regmodels.algebra.poly import PadicPoly
from regmodels.algebra.resultant import bezout_pi_certificate, jacobian_minors
from regmodels.closeness import (FormalAutomorphism, closeness_level,
                                 construct_automorphism,
                                 regularity_transfer_check,
                                 special_fibres_equal, verify_ideal_transport)
from regmodels.errors import PrecisionExhausted, ShapeMismatch
from regmodels.model.chart import ClosedPoint, hyperelliptic_surface


def test_closeness_level_examples():
    p, M = 5, 8
    m1 = hyperelliptic_surface([1, 1, 0, 0, 0, 1], p, M)        # x^5+x+1
    m2 = hyperelliptic_surface([1, 1 + 5**3, 0, 0, 0, 1], p, M)  # + 5^3 x
    assert closeness_level(m1, m2) == 3
    assert closeness_level(m1, m1) is None                       # >= cap
    m3 = hyperelliptic_surface([5, 0, 0, 1], p, M)
    m4 = hyperelliptic_surface([5 + 25 * 7, 0, 0, 1], p, M)
    assert closeness_level(m3, m4) == 2


def test_closeness_symmetry_and_truncation():
    rng = random.Random(8)
    p = 5
    for _ in range(20):
        M = 8
        base = [rng.randrange(1, 50) for _ in range(3)] + [1]
        N = rng.randrange(1, 6)
        bump = [p**N * rng.randrange(1, 20) for _ in range(4)]
        other = [a + b for a, b in zip(base, bump)]
        m1 = hyperelliptic_surface(base, p, M)
        m2 = hyperelliptic_surface(other, p, M)
        lvl = closeness_level(m1, m2)
        assert lvl == closeness_level(m2, m1)
        assert lvl is not None and lvl >= N
        # truncation monotonicity: at a smaller cap the level is min(lvl, cap)
        for cap in (2, 4):
            t1 = hyperelliptic_surface(base, p, cap)
            t2 = hyperelliptic_surface(other, p, cap)
            tl = closeness_level(t1, t2)
            expected = min(lvl, cap)
            assert (tl if tl is not None else cap) == expected


def test_closeness_base_change_stability():
    """Coefficient embedding into the quadratic unramified extension keeps
    the level: valuations computed in (Z/p^M)[z]/(m) with m irreducible."""
    p, M = 5, 8
    base = [1, 1, 0, 1]
    other = [1 + 5**2, 1, 0, 1]
    m1 = hyperelliptic_surface(base, p, M)
    m2 = hyperelliptic_surface(other, p, M)
    lvl = closeness_level(m1, m2)

    # the difference's coefficients, embedded as constants of W = Z[z]/(z^2-2)
    # mod p^M, keep their valuations (unramified extension)
    def w_val(c):
        # c as the W-element (c, 0): valuation = v_p(c)
        v = 0
        c %= p**M
        if c == 0:
            return None
        while c % p == 0:
            c //= p
            v += 1
        return v

    diffs = [a - b for a, b in zip(base, other)]
    w_lvl = min(v for v in (w_val(c) for c in diffs) if v is not None)
    assert w_lvl >= lvl


def test_special_fibres_equal():
    p, M = 5, 8
    m1 = hyperelliptic_surface([0, 0, 0, 1], p, M)       # y^2 = x^3
    m2 = hyperelliptic_surface([5, 0, 0, 1], p, M)       # y^2 = x^3 + 5
    assert special_fibres_equal(m1, m2)
    m3 = hyperelliptic_surface([0, 0, 1, 1], p, M)       # y^2 = x^3 + x^2
    assert not special_fibres_equal(m1, m3)
    # any 1-close pair has equal fibres
    m4 = hyperelliptic_surface([5 * 3, 5, 0, 1], p, M)
    m5 = hyperelliptic_surface([0, 0, 0, 1], p, M)
    assert special_fibres_equal(m4, m5)


def test_regularity_transfer():
    p, M = 5, 10
    origin = ClosedPoint(0, "x", (0, 1), (("x", (0,)), ("y", (0,))))
    m1 = hyperelliptic_surface([5, 0, 0, 1], p, M)
    m2 = hyperelliptic_surface([5 + 5**3, 0, 0, 1], p, M)
    assert regularity_transfer_check(m1, m2, origin)      # both regular
    m3 = hyperelliptic_surface([25, 0, 0, 1], p, M)
    m4 = hyperelliptic_surface([25 + 5**3, 0, 0, 1], p, M)
    assert regularity_transfer_check(m3, m4, origin)      # both non-regular
    assert regularity_transfer_check(m1, m1, origin)


def _hyperell_data(fcoeffs, p, M):
    x = PadicPoly.var("x", p, M)
    y = PadicPoly.var("y", p, M)
    f = PadicPoly.from_univariate(fcoeffs, "x", p, M)
    F = [y * y - f]
    minors = jacobian_minors(F, ["x", "y"])
    cert = bezout_pi_certificate(F, minors, M, exact_data=(fcoeffs, "x"))
    return F, minors, cert


def test_automorphism_spec_examples():
    p, M = 5, 14
    F, minors, cert = _hyperell_data([1, 1, 0, 1], p, M)
    sigma_id = construct_automorphism(F, F, cert, M, M)
    assert all(u.is_zero() for u in sigma_id.substitutions.values())

    G = [F[0] + 5**4]
    sigma = construct_automorphism(F, G, cert, 4, M)
    assert sigma.congruence_level >= 4 - 2 * cert.f0
    assert verify_ideal_transport(sigma, F, G, sigma.precision)
    assert sigma.composed_with_inverse_is_identity()

    F2, minors2, cert2 = _hyperell_data([5, 0, 0, 1], p, M)
    x = PadicPoly.var("x", p, M)
    G2 = [F2[0] + x.map_coefficients(lambda c: c * 5**7)]
    sigma2 = construct_automorphism(F2, G2, cert2, 7, M)
    assert sigma2.congruence_level >= 7 - 2 * cert2.f0
    assert verify_ideal_transport(sigma2, F2, G2, sigma2.precision)
    assert sigma2.composed_with_inverse_is_identity()


def test_transport_counterexample():
    p, M = 5, 2
    x = PadicPoly.var("x", p, M)
    y = PadicPoly.var("y", p, M)
    F = [y * y - x**3]
    G = [y * y - x**3 - 5]
    identity = {v: PadicPoly.zero(p, M) for v in ("x", "y")}
    sigma = FormalAutomorphism(("x", "y"), dict(identity), dict(identity),
                               M, M, {})
    assert not verify_ideal_transport(sigma, F, G, M)


def test_threshold_violation():
    p, M = 5, 12
    F, minors, cert = _hyperell_data([5, 0, 0, 1], p, M)     # f0 = 1
    G = [F[0] + 5**3]
    with pytest.raises(PrecisionExhausted):
        construct_automorphism(F, G, cert, 3, M)             # N < 2 f0 + 2


def test_not_close_raises():
    p, M = 5, 12
    F, minors, cert = _hyperell_data([1, 1, 0, 1], p, M)
    G = [F[0] + 5]
    with pytest.raises(ShapeMismatch):
        construct_automorphism(F, G, cert, 4, M)
