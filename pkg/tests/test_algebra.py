"""Scalar, polynomial, resultant and certificate layer tests."""

import random
from fractions import Fraction

import pytest

from regmodels.algebra.padic import TruncatedPadic, valuation, valuation_str
from regmodels.algebra.poly import PadicPoly
from regmodels.algebra.resultant import (bezout_pi_certificate,
                                         formal_quadratic_fold,
                                         jacobian_minors, rational_xgcd,
                                         reassemble_taylor, resultant,
                                         taylor_quadratic_split)
from regmodels.errors import PrecisionExhausted


def test_valuation_examples():
    assert valuation(TruncatedPadic(5, 50, 4)) == 2
    assert valuation(TruncatedPadic(5, 0, 4)) is None
    assert valuation_str(TruncatedPadic(5, 0, 4)) == ">=4"
    assert valuation(TruncatedPadic(7, 21, 3)) == 1


def test_valuation_multiplicative():
    rng = random.Random(11)
    for _ in range(200):
        p = rng.choice([5, 7])
        M = 6
        x = TruncatedPadic.from_int(rng.randrange(1, p**M), p, M)
        y = TruncatedPadic.from_int(rng.randrange(1, p**M), p, M)
        vx, vy = valuation(x), valuation(y)
        if vx is None or vy is None or vx + vy >= M:
            continue
        assert valuation(x * y) == vx + vy


def test_precision_semantics():
    x = TruncatedPadic(5, 7, 6)
    y = TruncatedPadic(5, 3, 2)
    assert (x + y).precision == 2
    assert (x * y).precision == 2
    with pytest.raises(PrecisionExhausted):
        TruncatedPadic(5, 5, 3).inverse()
    assert TruncatedPadic(5, 50, 4).divide_exact(2).residue == 2


def test_poly_roundtrips():
    p, M = 5, 6
    x = PadicPoly.var("x", p, M)
    y = PadicPoly.var("y", p, M)
    f = y * y - (x**3 + x + 1)
    assert f.degree("x") == 3 and f.degree("y") == 2
    g = f.substitute({"x": x + 2})
    assert g.substitute({"x": x - 2}) == f
    q, r = (f * (x + 2) + 7).div_rem(f, "y")
    assert q == x + 2 and r == PadicPoly.constant(7, p, M)
    assert (x**2 - 1).exact_div(x - 1, "x") == x + 1


def test_poly_congruence_needs_precision():
    p = 5
    a = PadicPoly.var("x", p, 3)
    b = PadicPoly.var("x", p, 3) + 5**2
    assert not a.congruent(b, 3)
    assert a.congruent(b, 2)
    with pytest.raises(PrecisionExhausted):
        a.congruent(b, 4)


def test_unit_inverse_neumann():
    p, M = 5, 5
    x = PadicPoly.var("x", p, M)
    u = PadicPoly.constant(3, p, M) + x.map_coefficients(lambda c: c * 5)
    assert (u * u.inverse_unit()) == PadicPoly.constant(1, p, M)
    with pytest.raises(PrecisionExhausted):
        (x + 1).inverse_unit()


# -- resultants ------------------------------------------------------------


def _sylvester_fraction_det(f, g):
    """Independent oracle: exact rational determinant of the Sylvester matrix."""
    df, dg = len(f) - 1, len(g) - 1
    n = df + dg
    rows = []
    for i in range(dg):
        row = [Fraction(0)] * n
        for j, c in enumerate(reversed(f)):
            row[i + j] = Fraction(c)
        rows.append(row)
    for i in range(df):
        row = [Fraction(0)] * n
        for j, c in enumerate(reversed(g)):
            row[i + j] = Fraction(c)
        rows.append(row)
    det = Fraction(1)
    for c in range(n):
        sel = next((i for i in range(c, n) if rows[i][c] != 0), None)
        if sel is None:
            return Fraction(0)
        if sel != c:
            rows[c], rows[sel] = rows[sel], rows[c]
            det = -det
        det *= rows[c][c]
        piv = rows[c][c]
        rows[c] = [v / piv for v in rows[c]]
        for i in range(c + 1, n):
            if rows[i][c]:
                fmul = rows[i][c]
                rows[i] = [a - fmul * b for a, b in zip(rows[i], rows[c])]
    return det


def test_resultant_spec_examples():
    p, M = 5, 6
    f = PadicPoly.from_univariate([1, 1, 0, 1], "x", p, M)
    fp = PadicPoly.from_univariate([1, 0, 3], "x", p, M)
    r = resultant(f, fp, "x")
    assert r.valuation() == 0
    assert r.residue % 5**6 == 31 % 5**6

    g = PadicPoly.from_univariate([5, 0, 0, 1], "x", p, M)
    gp = PadicPoly.from_univariate([0, 0, 3], "x", p, M)
    assert resultant(g, gp, "x").valuation() == 2

    one = PadicPoly.constant(1, p, M)
    assert resultant(PadicPoly.var("x", p, M), one, "x").residue == 1


def test_resultant_matches_fraction_oracle():
    rng = random.Random(5)
    p, M = 7, 8
    for _ in range(60):
        df = rng.randrange(1, 4)
        dg = rng.randrange(1, 4)
        f = [rng.randrange(-20, 20) for _ in range(df)] + [rng.randrange(1, 9)]
        g = [rng.randrange(-20, 20) for _ in range(dg)] + [rng.randrange(1, 9)]
        expected = _sylvester_fraction_det(f, g)
        got = resultant(PadicPoly.from_univariate(f, "x", p, M),
                        PadicPoly.from_univariate(g, "x", p, M), "x")
        assert got.residue == int(expected) % p**M


def test_resultant_in_ideal_property():
    """a f + b g = Res(f, g) with the rational-xgcd cofactors, many randoms."""
    rng = random.Random(17)
    checked = 0
    while checked < 100:
        df = rng.randrange(1, 4)
        dg = rng.randrange(1, 4)
        f = [rng.randrange(-9, 9) for _ in range(df)] + [rng.randrange(1, 5)]
        g = [rng.randrange(-9, 9) for _ in range(dg)] + [rng.randrange(1, 5)]
        s, t, r = rational_xgcd(f, g)
        if len(r) != 1 or r[0] == 0:
            continue            # common factor: skip draw
        # s f + t g == r identically over Q
        def mul(a, b):
            out = [Fraction(0)] * (len(a) + len(b) - 1)
            for i, xx in enumerate(a):
                for j, yy in enumerate(b):
                    out[i + j] += Fraction(xx) * Fraction(yy)
            return out
        total = mul(s, f)
        for i, c in enumerate(mul(t, g)):
            total[i] += c
        assert all(c == 0 for c in total[1:]) and total[0] == r[0]
        checked += 1


def test_jacobian_minors_shapes():
    p, M = 5, 6
    x = PadicPoly.var("x", p, M)
    y = PadicPoly.var("y", p, M)
    f = PadicPoly.from_univariate([1, 1, 0, 1], "x", p, M)
    F = y * y - f
    minors = jacobian_minors([F], ["x", "y"])
    fprime = PadicPoly.from_univariate([1, 0, 3], "x", p, M)
    assert minors[0] == -fprime
    assert minors[1] == 2 * y
    assert jacobian_minors([x, y], ["x", "y"]) == [PadicPoly.constant(1, p, M)]
    assert jacobian_minors([x * x], ["x"]) == [2 * x]
    # m = n: the single minor is the Jacobian determinant
    G = [x * y, x + y]
    det = jacobian_minors(G, ["x", "y"])[0]
    assert det == y * 1 - x * 1 + (x - y) * 0 + x * 0 + (x - x)


def test_bezout_certificate_hyperelliptic():
    p, M = 5, 8
    x = PadicPoly.var("x", p, M)
    y = PadicPoly.var("y", p, M)
    F = [y * y - (x**3 + x + 1)]
    minors = jacobian_minors(F, ["x", "y"])
    cert = bezout_pi_certificate(F, minors, M, exact_data=([1, 1, 0, 1], "x"))
    assert cert.f0 == 0 and cert.verify(F, minors)

    G = [y * y - (x**3 + 5)]
    minors2 = jacobian_minors(G, ["x", "y"])
    cert2 = bezout_pi_certificate(G, minors2, M, exact_data=([5, 0, 0, 1], "x"))
    assert cert2.verify(G, minors2)
    # 5 = (x^3+5) - (x/3)(3x^2) lies in the ideal, and 1 does not
    # (mod 5 the ideal reduces into (x^2)), so the certified exponent is
    # minimal at 1.  The resultant-only bound would give 2.
    assert cert2.f0 == 1

    unit_gens = [PadicPoly.var("x", p, M)]
    unit_minors = [PadicPoly.constant(1, p, M)]
    cert3 = bezout_pi_certificate(unit_gens, unit_minors, M,
                                  exact_data=([0, 1], "x"))
    assert cert3.f0 == 0 and cert3.verify(unit_gens, unit_minors)


def test_taylor_quadratic_split_examples():
    p, M = 5, 6
    x = PadicPoly.var("x", p, M)
    y = PadicPoly.var("y", p, M)
    u = PadicPoly.var("u", p, M)
    v = PadicPoly.var("v", p, M)

    F = [x * x]
    lin, lams = taylor_quadratic_split(F, [u], ["x"])
    assert lin[0] == 2 * x * u
    assert lams[0] == {(0, 0): PadicPoly.constant(1, p, M)}

    H = y * y - x**3
    lin2, lams2 = taylor_quadratic_split([H], [u, v], ["x", "y"])
    assert lin2[0] == -(3 * x * x * u) + 2 * y * v
    assert lams2[0][(0, 0)] == -(3 * x) - u       # cubic folded
    assert lams2[0][(1, 1)] == PadicPoly.constant(1, p, M)
    direct = H.substitute({"x": x + u, "y": y + v})
    assert reassemble_taylor(H, [u, v], ["x", "y"], lin2[0], lams2[0]) == direct

    lin3, lams3 = taylor_quadratic_split([x], [u], ["x"])
    assert lin3[0] == u and lams3[0] == {}


def test_taylor_reassembles_random():
    rng = random.Random(3)
    p, M = 5, 5
    for _ in range(25):
        terms = {(rng.randrange(4), rng.randrange(3)): rng.randrange(1, p**M)
                 for _ in range(4)}
        F = PadicPoly(p, M, ("x", "y"), terms)
        U = [PadicPoly.var("u", p, M) + rng.randrange(3),
             PadicPoly.var("v", p, M) * rng.randrange(1, 3)]
        lin, lams = taylor_quadratic_split([F], U, ["x", "y"])
        direct = F.substitute({"x": PadicPoly.var("x", p, M) + U[0],
                               "y": PadicPoly.var("y", p, M) + U[1]})
        assert reassemble_taylor(F, U, ["x", "y"], lin[0], lams[0]) == direct
