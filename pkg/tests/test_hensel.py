"""Hensel solver: spec examples, brute-force oracles, uniqueness."""

import random

import pytest

from regmodels.algebra.poly import PadicPoly
from regmodels.hensel import (HenselError, HenselProblem, hensel_solve,
                              hensel_solve_univariate)


def test_square_root_of_six():
    p, M = 5, 4
    x = PadicPoly.var("x", p, M)
    prob = HenselProblem([x * x - 6], ["x"], [PadicPoly.constant(1, p, M)], 1)
    b = hensel_solve(prob, M)[0]
    val = b.constant_value().residue
    assert (val * val - 6) % 5**4 == 0 and val % 5 == 1
    brute = [t for t in range(5**4) if (t * t - 6) % 5**4 == 0 and t % 5 == 1]
    assert brute == [val]


def test_exact_root_short_circuit():
    p, M = 5, 4
    x = PadicPoly.var("x", p, M)
    prob = HenselProblem([x], ["x"], [PadicPoly.zero(p, M)], 1)
    assert hensel_solve(prob, M)[0].is_zero()


def test_two_variable_spec_example():
    p, M = 5, 3
    x = PadicPoly.var("x", p, M)
    y = PadicPoly.var("y", p, M)
    prob = HenselProblem([x + y * y - 5, y + x * x], ["x", "y"],
                         [PadicPoly.zero(p, M)] * 2, 1)
    bx, by = [b.constant_value().residue for b in hensel_solve(prob, M)]
    brute = [(a, b) for a in range(125) for b in range(125)
             if (a + b * b - 5) % 125 == 0 and (b + a * a) % 125 == 0
             and a % 5 == 0 and b % 5 == 0]
    assert brute == [(bx, by)]


def test_defect_violation_raises():
    p, M = 5, 4
    x = PadicPoly.var("x", p, M)
    prob = HenselProblem([x - 1], ["x"], [PadicPoly.zero(p, M)], 2)
    with pytest.raises(HenselError):
        hensel_solve(prob, M)


def test_jacobian_not_invertible_raises():
    p, M = 5, 4
    x = PadicPoly.var("x", p, M)
    prob = HenselProblem([x * x - 25], ["x"], [PadicPoly.zero(p, M)], 2)
    with pytest.raises(HenselError):
        hensel_solve(prob, M)


def _random_unit_jacobian_system(rng, p, n, M):
    """x_i + p * (random quadratic) : Jacobian at 0 is the identity."""
    names = ["x", "y", "z"][:n]
    xs = [PadicPoly.var(v, p, M) for v in names]
    system = []
    for i in range(n):
        f = xs[i]
        for _ in range(rng.randrange(0, 3)):
            j, k = rng.randrange(n), rng.randrange(n)
            c = rng.randrange(1, p**2)
            f = f + xs[j] * xs[k] * (c * p)
        c0 = p * rng.randrange(0, p**(M - 1))
        system.append(f + c0)
    return system, names


def test_random_systems_residual_and_congruence():
    rng = random.Random(123)
    for _ in range(100):
        p = rng.choice([5, 7])
        n = rng.randrange(1, 4)
        M = rng.randrange(3, 7)
        system, names = _random_unit_jacobian_system(rng, p, n, M)
        approx = [PadicPoly.zero(p, M) for _ in range(n)]
        prob = HenselProblem(system, names, approx, 1)
        sol = hensel_solve(prob, M)
        for f in system:
            val = f.substitute({v: s for v, s in zip(names, sol)})
            assert val.is_zero()
        for s in sol:
            v = s.min_coeff_valuation()
            assert v is None or v >= 1      # b == a mod pi^d


def test_univariate_agreement_with_bruteforce():
    rng = random.Random(77)
    for _ in range(100):
        p = rng.choice([5, 7])
        M = rng.randrange(2, 5)
        # f(x) = (x - r) * unit + p * junk with a simple root r mod p
        r = rng.randrange(p)
        x = PadicPoly.var("x", p, M)
        f = (x - r) * rng.randrange(1, p) + p * rng.randrange(p**(M - 1))
        a = hensel_solve_univariate(f, "x", r, M)
        brute = [t for t in range(p**M)
                 if f.substitute({"x": PadicPoly.constant(t, p, M)})
                 .constant_value().is_zero() and t % p == r % p]
        assert a in brute and len(brute) == 1
