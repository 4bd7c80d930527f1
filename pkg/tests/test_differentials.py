"""Wedge coefficients, orders along components, lattices, fudge factors."""

from fractions import Fraction

from regmodels.algebra.poly import PadicPoly
from regmodels.differentials import (ComponentOrderEngine, RegularLattice,
                                     fudge_factor, hermite_normalize,
                                     component_lattice, regular_lattice,
                                     wedge_coefficient)
from regmodels.invariants.fibre import special_fibre
from regmodels.model.chart import hyperelliptic_surface
from regmodels.model.resolve import resolve


def _pipeline(coeffs, p=5, M=12, max_steps=10):
    s = hyperelliptic_surface(coeffs, p, M)
    tr = resolve(s, max_steps=max_steps)
    return tr, special_fibre(tr.surface)


def test_wedge_coefficients_weierstrass():
    p, M = 5, 8
    s = hyperelliptic_surface([1, 1, 0, 1], p, M)
    chart = s.charts[0]
    y = PadicPoly.var("y", p, M)
    fprime = PadicPoly.from_univariate([1, 0, 3], "x", p, M)
    assert wedge_coefficient(chart, "x") == -(2 * y)
    assert wedge_coefficient(chart, "y") == -fprime


def test_wedge_coefficients_simple_shapes():
    p, M = 5, 8
    from regmodels.model.chart import Chart
    x = PadicPoly.var("x", p, M)
    y = PadicPoly.var("y", p, M)
    # dF ^ dx = dy ^ dx = -dx ^ dy and dF ^ dy = -2x dx ^ dy
    c1 = Chart(chart_id=0, p=p, precision=M, variables=("x", "y"),
               relations=(), generator=y - x * x)
    assert wedge_coefficient(c1, "x") == PadicPoly.constant(-1, p, M)
    assert wedge_coefficient(c1, "y") == -(2 * x)
    # dF ^ dx = dy ^ dx (unit coefficient), dF ^ dy = 0
    c2 = Chart(chart_id=0, p=p, precision=M, variables=("x", "y"),
               relations=(), generator=y)
    u = wedge_coefficient(c2, "x")
    assert u.is_constant() and u.constant_value().is_unit()
    assert wedge_coefficient(c2, "y").is_zero()


def test_dx_over_y_has_order_zero_and_unit_image():
    """On every initial Weierstrass chart dx/y maps to the unit -2."""
    for coeffs in ([1, 1, 0, 1], [5, 0, 0, 1], [1, 2, 0, 0, 0, 1]):
        for p in (5, 7):
            tr, fib = _pipeline(coeffs, p)
            genus = (len(coeffs) - 2) // 2
            for comp in fib.components:
                eng = ComponentOrderEngine(tr.surface, comp, genus)
                orders = eng.basis_orders()
                if tr.blowup_count == 0:
                    assert orders[0] == 0
                # Lemma(1): ord(pi * omega) = ord(omega) + multiplicity
                base = [Fraction(0)] * genus
                base[0] = Fraction(1)
                scaled = [c * p for c in base]
                assert eng.order_of_combination(scaled) == \
                    eng.order_of_combination(base) + eng.multiplicity


def test_good_reduction_lattices_standard():
    tr, fib = _pipeline([1, 1, 0, 1], 5)
    W = regular_lattice(tr.surface, fib, 1)
    assert W.basis == [[Fraction(1)]]
    assert fudge_factor(W, 5, 5).valuation == 0

    tr2, fib2 = _pipeline([1, 2, 0, 0, 0, 1], 5)
    W2 = regular_lattice(tr2.surface, fib2, 2)
    assert W2.basis == [[Fraction(1), Fraction(0)], [Fraction(0), Fraction(1)]]
    assert fudge_factor(W2, 5, 25).valuation == 0


def test_scaled_lattice_and_fudge_directions():
    # W = pi^{-1} * standard: lambda = pi, fudge 1/q
    W = RegularLattice([[Fraction(1, 5)]])
    assert fudge_factor(W, 5, 5).valuation == 1
    assert fudge_factor(W, 5, 5).value == Fraction(1, 5)
    # W = standard: fudge 1
    assert fudge_factor(RegularLattice([[Fraction(1)]]), 5, 5).valuation == 0
    # unimodular change of basis leaves the fudge valuation alone
    W2 = RegularLattice(hermite_normalize(
        [[Fraction(2), Fraction(1)], [Fraction(3), Fraction(2)]], 5))
    assert fudge_factor(W2, 5, 25).valuation == 0


def test_hermite_normalize_canonical():
    cols = [[Fraction(5), Fraction(0)], [Fraction(3), Fraction(1)]]
    h1 = hermite_normalize(cols, 5)
    h2 = hermite_normalize(list(reversed(cols)), 5)
    assert h1 == h2
    det = h1[0][0] * h1[1][1] - h1[0][1] * h1[1][0]
    assert abs(det) == 5


def test_nonminimal_scaling_fixture():
    """y^2 = x^3 + p^4 x + p^6: the regular lattice is p * standard, so
    lambda = p^{-1}; the det-valuation is +1 (the spec's 'fudge valuation 1')
    and v(lambda) = -1."""
    p = 5
    tr, fib = _pipeline([5**6, 5**4, 0, 1], p, M=14)
    assert tr.blowup_count >= 3
    W = regular_lattice(tr.surface, fib, 1)
    assert W.basis == [[Fraction(5)]]
    assert W.determinant_valuation(p) == 1
    assert fudge_factor(W, p, p).valuation == -1


def test_component_lattice_consistency():
    tr, fib = _pipeline([125, 0, 1, 1], 5)       # split I3: 3 components
    for comp in fib.components:
        L = component_lattice(tr.surface, comp, 1)
        assert L.basis == [[Fraction(1)]]
