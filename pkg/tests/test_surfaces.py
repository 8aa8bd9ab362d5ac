import cmath
import math

import numpy as np
import pytest

from teichlab.errors import BudgetExceeded, DegenerateGeometry
from teichlab.surfaces import (SL2Matrix, TranslationSurface, double_pentagon,
                               make_matrix, maxnorm, regular_octagon, square_torus,
                               surface_by_name)


def test_make_matrix_kinds():
    assert make_matrix("geodesic", 0.0) == SL2Matrix.identity()
    r = make_matrix("rotation", math.pi / 2)
    assert abs(r.a) < 1e-15 and r.b == 1.0 and r.c == -1.0 and abs(r.d) < 1e-15
    h = make_matrix("horocycle", 2.5)
    assert (h.a, h.b, h.c, h.d) == (1.0, 2.5, 0.0, 1.0)
    hc = make_matrix("opposite_horocycle", -1.5)
    assert (hc.a, hc.b, hc.c, hc.d) == (1.0, 0.0, -1.5, 1.0)
    with pytest.raises(ValueError):
        make_matrix("shear", 1.0)
    with pytest.raises(ValueError):
        make_matrix("geodesic", math.inf)


def test_determinant_guard():
    with pytest.raises(ValueError):
        SL2Matrix(2.0, 0.0, 0.0, 1.0)


def test_rotation_factors_through_horocycles():
    # r_theta = opposite_horocycle(-tan) . geodesic(log cos) . horocycle(tan)
    rng = np.random.default_rng(5)
    for theta in rng.uniform(-math.pi / 4, math.pi / 4, 100):
        lhs = make_matrix("rotation", theta)
        rhs = (make_matrix("opposite_horocycle", -math.tan(theta))
               @ make_matrix("geodesic", math.log(math.cos(theta)))
               @ make_matrix("horocycle", math.tan(theta)))
        assert lhs.max_entry_distance(rhs) <= 1e-12


def test_geodesic_contracts_opposite_horocycle():
    # g_t hcheck_s g_{-t} = hcheck_{e^{-2t} s}
    t, s = 1.3, 0.7
    lhs = make_matrix("geodesic", t) @ make_matrix("opposite_horocycle", s) \
        @ make_matrix("geodesic", -t)
    rhs = make_matrix("opposite_horocycle", math.exp(-2 * t) * s)
    assert lhs.max_entry_distance(rhs) <= 1e-12


def test_builders_geometry():
    x = square_torus()
    assert x.genus == 1 and x.area == pytest.approx(1.0)
    assert [c.order for c in x.cone_points] == [0]

    o = regular_octagon()
    assert o.genus == 2
    assert [c.order for c in o.cone_points] == [2]
    assert o.cone_points[0].angle == pytest.approx(6 * math.pi)

    dp = double_pentagon()
    assert dp.genus == 2 and [c.order for c in dp.cone_points] == [2]

    with pytest.raises(ValueError):
        surface_by_name("dodecahedron")


def test_json_round_trip():
    x = regular_octagon()
    y = TranslationSurface.from_json(x.to_json())
    assert y.genus == x.genus and y.area == pytest.approx(x.area)


def test_bad_gluing_rejected():
    poly = [0j, 1 + 0j, 1 + 1j, 0 + 1j]
    with pytest.raises(ValueError):
        TranslationSurface([poly], [((0, 0), (0, 1)), ((0, 2), (0, 3))])


def test_act_preserves_area_and_combinatorics():
    x = regular_octagon()
    rng = np.random.default_rng(11)
    for _ in range(20):
        m = (SL2Matrix.geodesic(rng.uniform(-1, 1))
             @ SL2Matrix.horocycle(rng.uniform(-1, 1))
             @ SL2Matrix.rotation(rng.uniform(0, 2 * math.pi)))
        y = x.act(m)
        assert y.area == pytest.approx(x.area, rel=1e-9)
        assert y.gluings == x.gluings
        assert [c.order for c in y.cone_points] == [2]


def test_act_composition_on_holonomies():
    x = square_torus()
    m1 = SL2Matrix.geodesic(0.4) @ SL2Matrix.horocycle(0.3)
    m2 = SL2Matrix.rotation(0.9)
    one = x.act(m1).act(m2).saddle_connections(2.0)
    two = x.act(m2 @ m1).saddle_connections(2.0)
    assert len(one) == len(two)
    for a, b in zip(one, two):
        assert abs(a.holonomy - b.holonomy) <= 1e-9


def test_act_degenerate_geometry():
    x = square_torus()
    with pytest.raises(DegenerateGeometry):
        # e^{2*380} overflows doubles: the polygon leaves representable range
        x.act(SL2Matrix.geodesic(380.0)).act(SL2Matrix.geodesic(380.0))


def test_torus_saddle_connections_bound_one():
    x = square_torus()
    hol = {(round(s.holonomy.real, 9), round(s.holonomy.imag, 9))
           for s in x.saddle_connections(1.0)}
    assert hol == {(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, -1.0)}
    assert x.saddle_connections(0.5) == []


def test_torus_saddle_connections_are_primitive():
    x = square_torus()
    for sc in x.saddle_connections(3.0):
        m, n = round(sc.holonomy.real), round(sc.holonomy.imag)
        assert math.gcd(abs(m), abs(n)) == 1


def test_saddle_connections_monotone_in_bound():
    x = regular_octagon()
    small = {(round(s.holonomy.real, 9), round(s.holonomy.imag, 9))
             for s in x.saddle_connections(1.2)}
    large = {(round(s.holonomy.real, 9), round(s.holonomy.imag, 9))
             for s in x.saddle_connections(2.4)}
    assert small <= large and len(large) > len(small)


def test_octagon_contains_side_directions():
    o = regular_octagon()
    sides = {o.edge_vector(0, e) for e in range(4)}
    found = {sc.holonomy for sc in o.saddle_connections(1.0 + 1e-9)}
    for v in sides:
        assert any(abs(f - v) < 1e-9 or abs(f + v) < 1e-9 for f in found), v


def test_holonomies_transform_linearly():
    x = double_pentagon()
    m = SL2Matrix.horocycle(0.25) @ SL2Matrix.geodesic(0.3)
    base = x.saddle_connections(1.2)
    op_norm = math.sqrt(max(abs(m.apply(1)) ** 2, abs(m.apply(1j)) ** 2)) * math.sqrt(2)
    bound = 1.05 * op_norm * max(abs(sc.holonomy) for sc in base)
    moved_set = [sc.holonomy for sc in x.act(m).saddle_connections(bound)]
    for sc in base:
        img = m.apply(sc.holonomy)
        assert any(abs(img - w) <= 1e-9 or abs(img + w) <= 1e-9 for w in moved_set)


def test_systole_under_geodesic_flow():
    x = square_torus()
    for t in np.linspace(0.1, 2.0, 12):
        y = x.act(SL2Matrix.geodesic(float(t)))
        assert abs(y.systole() - math.exp(-t)) <= 1e-9


def test_compact_set_membership_flip():
    x = square_torus()
    eps = 0.2
    t_star = math.log(1 / eps)
    before = x.act(SL2Matrix.geodesic(t_star - 1e-6))
    after = x.act(SL2Matrix.geodesic(t_star + 1e-6))
    assert before.in_compact_set(eps)
    assert not after.in_compact_set(eps)


def test_systole_rotation_distortion_bounded():
    # max-norm systole moves by at most sqrt(2) under rotations
    x = regular_octagon()
    base = x.systole()
    rng = np.random.default_rng(3)
    for theta in rng.uniform(0, 2 * math.pi, 25):
        rotated = x.act(SL2Matrix.rotation(float(theta))).systole()
        assert base / math.sqrt(2) - 1e-12 <= rotated <= base * math.sqrt(2) + 1e-12


def test_euclidean_systole_rotation_invariant():
    x = double_pentagon()
    base = x.systole(norm="euclidean")
    rng = np.random.default_rng(4)
    for theta in rng.uniform(0, 2 * math.pi, 10):
        rotated = x.act(SL2Matrix.rotation(float(theta))).systole(norm="euclidean")
        assert rotated == pytest.approx(base, abs=1e-9)


def test_lattice_systole_agrees_with_unfolding():
    x = square_torus()
    rng = np.random.default_rng(8)
    for _ in range(30):
        m = (SL2Matrix.geodesic(rng.uniform(-1.5, 1.5))
             @ SL2Matrix.horocycle(rng.uniform(-1, 1))
             @ SL2Matrix.rotation(rng.uniform(0, 2 * math.pi)))
        y = x.act(m)
        for norm in ("max", "euclidean"):
            assert y.systole(norm=norm, method="lattice") == \
                pytest.approx(y.systole(norm=norm, method="unfold"), abs=1e-11)
    with pytest.raises(ValueError):
        regular_octagon().systole(method="lattice")


def test_unfolding_budget(monkeypatch):
    monkeypatch.setenv("TEICH_LAB_BUDGET", "5")
    with pytest.raises(BudgetExceeded):
        regular_octagon().saddle_connections(3.0)


def test_sc_order_is_canonical():
    x = regular_octagon()
    scs = x.saddle_connections(2.0)
    keys = [(abs(s.holonomy), cmath.phase(s.holonomy)) for s in scs]
    assert keys == sorted(keys)
    assert all(maxnorm(s.holonomy) <= 2.0 + 1e-9 for s in scs)
