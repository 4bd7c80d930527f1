"""Charts, regularity, blowups (worked fixtures bit-exact), resolution."""

import pytest

from regmodels.algebra.poly import PadicPoly
from regmodels.errors import PointNotOnModel
from regmodels.model.blowup import blowup
from regmodels.model.chart import ClosedPoint, hyperelliptic_surface
from regmodels.model.regularity import is_regular_at, singular_points
from regmodels.model.resolve import replay, resolve
from regmodels.model.serialize import surface_to_json


def _weierstrass(coeffs, p=5, M=10):
    return hyperelliptic_surface(coeffs, p, M)


def test_regularity_fixtures():
    p, M = 5, 10
    s = _weierstrass([5, 0, 0, 1])            # y^2 = x^3 + 5
    origin = ClosedPoint(0, "x", (0, 1), (("x", (0,)), ("y", (0,))))
    assert is_regular_at(s.charts[0], origin)

    s2 = _weierstrass([25, 0, 0, 1])          # y^2 = x^3 + 25
    assert not is_regular_at(s2.charts[0], origin)

    with pytest.raises(PointNotOnModel):
        is_regular_at(_weierstrass([1, 1, 0, 1]).charts[0], origin)


def test_singular_point_sets():
    assert singular_points(_weierstrass([1, 1, 0, 1])) == []
    assert singular_points(_weierstrass([5, 0, 0, 1])) == []
    pts = singular_points(_weierstrass([25, 0, 0, 1]))
    assert len(pts) == 1
    cp = pts[0]
    assert cp.chart_id == 0 and cp.degree == 1
    assert cp.coord_dict() == {"x": (0,), "y": (0,)}
    # nodal fixture: one singular point at the node
    pts2 = singular_points(_weierstrass([125, 0, 1, 1]))
    assert len(pts2) == 1 and pts2[0].coord_dict() == {"x": (0,), "y": (0,)}


def test_blowup_worked_fixtures_bit_exact():
    """The two strict transforms of y^2 - x^3 - 25 under blowing up (5,x,y)."""
    p, M = 5, 10
    s = _weierstrass([25, 0, 0, 1], p, M)
    centre = singular_points(s)[0]
    s2 = blowup(s, centre)
    charts = {c.chart_id: c for c in s2.active_charts()}
    # chart ids 2,3,4 are the pi-, x- and y-charts of family 0
    pi_chart = charts[2]
    assert pi_chart.variables == ("t0_1", "t0_2")
    x1 = PadicPoly.var("t0_1", p, pi_chart.generator.precision)
    y1 = PadicPoly.var("t0_2", p, pi_chart.generator.precision)
    assert pi_chart.generator == y1 * y1 - 5 * x1**3 - 1
    assert pi_chart.relations == ()

    x_chart = charts[3]
    prec = x_chart.generator.precision
    x = PadicPoly.var("x", p, prec)
    u = PadicPoly.var("t0_0", p, prec)
    v = PadicPoly.var("t0_2", p, prec)
    assert x_chart.generator == v * v - x - u * u
    assert len(x_chart.relations) == 1
    xf = PadicPoly.var("x", p, M)
    uf = PadicPoly.var("t0_0", p, M)
    assert x_chart.relations[0] == xf * uf - 5


def test_strict_transform_exponents():
    """Both worked charts divide out the exceptional equation twice."""
    p, M = 5, 10
    x = PadicPoly.var("x", p, M)
    y = PadicPoly.var("y", p, M)
    u = PadicPoly.var("u", p, M)
    v = PadicPoly.var("v", p, M)
    # chart h=pi: generator 25 y1^2 - 125 x1^3 - 25
    g_pi = 25 * y * y - 125 * x**3 - 25
    from regmodels.model.blowup import _strict_transform_divide
    res, e = _strict_transform_divide(g_pi, PadicPoly.constant(5, p, M), (), p, M)
    assert e == 2
    # chart h=x: generator x^2 v^2 - x^3 - 25 with relation xu - 5
    g_x = x * x * v * v - x**3 - 25
    rel = x * u - 5
    res2, e2 = _strict_transform_divide(g_x, x, (rel,), p, M)
    assert e2 == 2
    assert res2.congruent(v * v - x - u * u, res2.precision)


def test_blowup_leaves_unrelated_charts():
    s = _weierstrass([25, 0, 0, 1])
    centre = singular_points(s)[0]
    s2 = blowup(s, centre)
    # the second root chart is unchanged (centre not visible at infinity)
    assert s2.charts[1].generator == s.charts[1].generator
    assert s2.charts[1].active and not s2.charts[0].active
    assert s2.charts[1].excluded == []


def test_generic_fibre_roundtrip():
    """Blowdown expressions substituted into the parent generator recover a
    multiple of the new generator: the generic fibre is unchanged."""
    p, M = 5, 10
    s = _weierstrass([25, 0, 0, 1], p, M)
    centre = singular_points(s)[0]
    s2 = blowup(s, centre)
    parent_gen = s.charts[0].generator
    for c in s2.active_charts():
        if c.parent_id != 0:
            continue
        pulled = parent_gen.substitute(c.to_parent)
        # pulled = (exceptional)^e * generator, possibly at lower precision
        exc = c.exceptional[-1][1]
        from regmodels.model.blowup import _strict_transform_divide
        q, e = _strict_transform_divide(pulled, exc, c.relations, p, M)
        prec = min(q.precision, c.generator.precision)
        assert q.congruent(c.generator.truncate(prec), prec)


def test_resolution_deterministic_and_complete():
    import json
    for coeffs in ([25, 0, 0, 1], [125, 0, 1, 1]):
        s = _weierstrass(coeffs)
        t1 = resolve(s, max_steps=6)
        t2 = resolve(s, max_steps=6)
        assert [c.sort_key() for c in t1.centres] == \
            [c.sort_key() for c in t2.centres]
        assert json.dumps(surface_to_json(t1.surface), sort_keys=True) == \
            json.dumps(surface_to_json(t2.surface), sort_keys=True)
        assert singular_points(t1.surface) == []
        replayed = replay(s, t1)
        assert json.dumps(surface_to_json(replayed), sort_keys=True) == \
            json.dumps(surface_to_json(t1.surface), sort_keys=True)


def test_known_blowup_counts():
    for coeffs, n in [([1, 1, 0, 1], 0), ([5, 0, 0, 1], 0),
                      ([0, 5, 0, 1], 1), ([25, 0, 0, 1], 1),
                      ([50, 0, 1, 1], 1), ([625, 0, 1, 1], 2)]:
        assert resolve(_weierstrass(coeffs), max_steps=8).blowup_count == n
