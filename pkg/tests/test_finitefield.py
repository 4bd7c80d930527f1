"""Finite fields, univariate and bivariate factorization."""

import random

from regmodels.algebra.bivariate import BiPoly, bi_exact_div, factor_bivariate
from regmodels.algebra.finitefield import (FiniteField, factor_univariate,
                                           poly_eval, poly_from_ints, poly_mul,
                                           roots, squarefree_decomposition)


def test_field_axioms_random():
    rng = random.Random(2)
    for p, deg in [(5, 1), (5, 2), (7, 3), (13, 2)]:
        F = FiniteField(p, deg)
        elems = [F.from_coeffs([rng.randrange(p) for _ in range(deg)])
                 for _ in range(12)]
        for a in elems:
            for b in elems:
                assert F.mul(a, b) == F.mul(b, a)
                assert F.add(a, b) == F.add(b, a)
            if not F.is_zero(a):
                assert F.mul(a, F.inv(a)) == F.one
        assert len(set(F.elements())) == F.q


def test_embedding_is_homomorphism():
    F5, F25 = FiniteField(5, 1), FiniteField(5, 2)
    phi = F5.embed_into(F25)
    for a in F5.elements():
        for b in F5.elements():
            assert phi(F5.mul(a, b)) == F25.mul(phi(a), phi(b))
            assert phi(F5.add(a, b)) == F25.add(phi(a), phi(b))


def test_univariate_factor_roundtrip():
    rng = random.Random(9)
    for _ in range(40):
        p = rng.choice([5, 7])
        F = FiniteField(p, rng.choice([1, 2]))
        deg = rng.randrange(2, 7)
        coeffs = [F.from_coeffs([rng.randrange(p) for _ in range(F.deg)])
                  for _ in range(deg)] + [F.one]
        f = coeffs
        factors = factor_univariate(F, f)
        prod = [F.one]
        for g, m in factors:
            for _ in range(m):
                prod = poly_mul(F, prod, g)
        assert prod == f
        for g, _ in factors:
            assert len(factor_univariate(F, g)) == 1


def test_roots_and_squarefree():
    F5 = FiniteField(5, 1)
    f = poly_from_ints(F5, [-1, 0, 1])
    assert roots(F5, f) == [(1,), (4,)]
    g = poly_mul(F5, poly_from_ints(F5, [-1, 1]),
                 poly_mul(F5, poly_from_ints(F5, [-1, 1]),
                          poly_from_ints(F5, [1, 1])))
    decomp = squarefree_decomposition(F5, g)
    assert sorted(m for _, m in decomp) == [1, 2]
    # p-th power handling
    h = poly_from_ints(F5, [1, 0, 0, 0, 0, 1])     # (x+1)^5
    assert factor_univariate(F5, h) == [([F5.one, F5.one], 5)]


def test_bivariate_factor_roundtrip():
    rng = random.Random(21)
    for _ in range(25):
        p = rng.choice([5, 7])
        F = FiniteField(p, 1)
        # random product of small factors
        nfac = rng.randrange(1, 4)
        prod = BiPoly.constant(F, "x", "y", F.one)
        for _ in range(nfac):
            terms = {}
            for _ in range(rng.randrange(2, 4)):
                terms[(rng.randrange(3), rng.randrange(2))] = \
                    F.from_int(rng.randrange(1, p))
            g = BiPoly(F, "x", "y", terms)
            if g.is_zero() or g.is_constant():
                continue
            prod = prod * g
        if prod.is_constant():
            continue
        fs = factor_bivariate(prod)
        back = BiPoly.constant(F, "x", "y", F.one)
        for g, m in fs:
            for _ in range(m):
                back = back * g
        # equal up to a scalar
        k = next(iter(prod.terms))
        assert k in back.terms
        c = F.mul(prod.terms[k], F.inv(back.terms[k]))
        assert back.scale(c).terms == prod.terms
        for g, _ in fs:
            assert len(factor_bivariate(g)) == 1


def test_bivariate_fibre_shapes():
    F5 = FiniteField(5, 1)

    def bp(terms):
        return BiPoly.from_int_terms(F5, "x", "y", terms)

    assert len(factor_bivariate(bp({(0, 2): 1, (2, 0): -1}))) == 2    # y^2-x^2
    assert len(factor_bivariate(bp({(0, 2): 1, (3, 0): -1}))) == 1    # y^2-x^3
    fs = factor_bivariate(bp({(0, 2): 1, (1, 1): -2, (2, 0): 1}))     # (y-x)^2
    assert len(fs) == 1 and fs[0][1] == 2
    # nonsplit conic pair splits over F_25
    g = bp({(0, 2): 1, (2, 0): -2})
    assert len(factor_bivariate(g)) == 1
    F25 = FiniteField(5, 2)
    phi = F5.embed_into(F25)
    assert len(factor_bivariate(g.map_into(F25, phi))) == 2


def test_exact_division():
    F5 = FiniteField(5, 1)
    a = BiPoly.from_int_terms(F5, "x", "y", {(0, 1): 1, (2, 0): -1})
    b = BiPoly.from_int_terms(F5, "x", "y", {(0, 1): 1, (2, 0): 1, (0, 0): 1})
    prod = a * b
    assert bi_exact_div(prod, a).terms == b.terms
    assert bi_exact_div(prod, b).terms == a.terms
    assert bi_exact_div(a, b) is None
