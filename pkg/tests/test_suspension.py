import math
from fractions import Fraction as F

import numpy as np
import pytest

from teichlab.errors import InvalidSuspension, SingularTrajectory
from teichlab.iet import IET
from teichlab.permutations import Permutation
from teichlab.suspension import (SuspensionData, Transversal, compare_first_return,
                                 first_return_oracle, short_interval_saddle_connection,
                                 standard_transversal, suspend, vertical_first_return,
                                 verify_local_product)


def fib(n):
    a, b = 1, 1
    for _ in range(n - 1):
        a, b = b, a + b
    return a


def shipped_suspensions():
    """The five suspensions used by the acceptance suite (d = 2, 3, 4)."""
    return [
        SuspensionData(base=IET.circle_rotation(F(fib(20), fib(21))), b=(1.0, -1.0)),
        SuspensionData(base=IET.circle_rotation(F(408, 985)), b=(1.3, -1.3)),
        SuspensionData(base=IET([F(1, 3), F(1, 3), F(1, 3)], Permutation((3, 2, 1))),
                       b=(1.0, 0.0, -1.0)),
        SuspensionData(base=IET([F(1, 2), F(1, 3), F(1, 6)], Permutation((3, 1, 2))),
                       b=(0.7, -0.5, -0.2)),
        SuspensionData(base=IET([F(3, 10), F(1, 5), F(1, 4), F(1, 4)],
                                Permutation.reversal(4)),
                       b=(1.0, 0.5, -0.5, -1.0)),
    ]


def test_sign_conditions_enforced():
    base = IET.circle_rotation(F(2, 5))
    with pytest.raises(InvalidSuspension):
        SuspensionData(base=base, b=(-1.0, 1.0))   # top partial sum <= 0
    with pytest.raises(InvalidSuspension):
        SuspensionData(base=base, b=(1.0, 1.0))    # bottom partial sum >= 0


def test_unbalanced_b_rejected_for_transversal_work():
    s = SuspensionData(base=IET.circle_rotation(F(2, 5)), b=(1.0, -1.5))
    with pytest.raises(InvalidSuspension):
        standard_transversal(s)
    with pytest.raises(InvalidSuspension):
        short_interval_saddle_connection(s, 2)


def test_heights_and_area():
    s = SuspensionData(base=IET([F(1, 3), F(2, 3)], Permutation((2, 1))), b=(1.0, -1.0))
    assert s.heights == (1.0, 1.0)
    surf = suspend(s)
    assert surf.area == pytest.approx(s.area, rel=1e-9)
    assert s.area == pytest.approx(1.0)


def test_d2_suspension_is_torus():
    s = SuspensionData(base=IET([F(1, 3), F(2, 3)], Permutation((2, 1))), b=(1.0, -1.0))
    surf = suspend(s)
    assert surf.genus == 1
    assert [c.order for c in surf.cone_points] == [0]
    assert surf.lattice_basis() is not None


def test_d4_reversal_suspension_is_genus_two():
    s = shipped_suspensions()[4]
    surf = suspend(s)
    assert surf.genus == 2
    assert [c.order for c in surf.cone_points] == [2]
    assert surf.cone_points[0].angle == pytest.approx(6 * math.pi)


@pytest.mark.parametrize("perm,expected", [
    (Permutation.reversal(4), (2, (2,))),
    (Permutation((3, 1, 2)), (1, (0, 0))),
])
def test_genus_depends_only_on_permutation(perm, expected):
    rng = np.random.default_rng(17)
    d = perm.d
    seen = set()
    for _ in range(50):
        parts = rng.dirichlet([2] * d)
        lengths = [F(int(1000 * v) + 50, 5000) for v in parts]
        lengths[-1] = 1 - sum(lengths[:-1])
        while True:
            b = [1.0] + [float(rng.uniform(-0.9, 0.9)) for _ in range(d - 2)] + [-1.2]
            try:
                s = SuspensionData(base=IET(lengths, perm), b=tuple(b))
                break
            except InvalidSuspension:
                continue
        surf = suspend(s)
        seen.add((surf.genus, tuple(sorted(c.order for c in surf.cone_points))))
    assert seen == {expected}


def test_first_return_matches_exact_iet():
    for s in shipped_suspensions():
        surf = suspend(s)
        tr = standard_transversal(s)
        table = first_return_oracle(surf, tr, samples=150,
                                    rng=np.random.default_rng(5))
        assert compare_first_return(table, s.base) <= 1e-8


def test_return_times_match_heights():
    s = shipped_suspensions()[2]
    surf = suspend(s)
    tr = standard_transversal(s)
    table = first_return_oracle(surf, tr, samples=60, rng=np.random.default_rng(2))
    for u, _, tau in table.entries:
        i = s.base.interval_index(F(u))
        assert tau == pytest.approx(s.heights[i - 1], abs=1e-9)


def test_full_width_transversal_on_square_cylinder():
    # the square torus is one vertical cylinder: a full-width horizontal
    # transversal has the identity as its return map, with return time 1
    from teichlab.surfaces import square_torus

    surf = square_torus()
    tr = Transversal(polygon=0, start=0.25j, end=1 + 0.25j)
    for u in (0.1, 0.37, 0.81):
        u_out, tau = vertical_first_return(surf, tr, u)
        assert u_out == pytest.approx(u, abs=1e-12)
        assert tau == pytest.approx(1.0)


def test_breakpoints_sit_at_discontinuities():
    # the empirical translation jumps exactly across each interior beta_i:
    # tracing just left/right of beta_i reproduces the IET's two branches
    for s in shipped_suspensions()[2:]:
        surf = suspend(s)
        tr = standard_transversal(s)
        delta = 1e-9
        for beta in s.base.betas[1:-1]:
            lo, hi = float(beta) - delta, float(beta) + delta
            out_lo, _ = vertical_first_return(surf, tr, lo)
            out_hi, _ = vertical_first_return(surf, tr, hi)
            exact_lo = float(s.base.evaluate(F(lo)))
            exact_hi = float(s.base.evaluate(F(hi)))
            assert out_lo == pytest.approx(exact_lo, abs=1e-8)
            assert out_hi == pytest.approx(exact_hi, abs=1e-8)
            # the empirical jump equals the exact one (possibly 0: an IET may
            # have a removable break where adjacent translations coincide)
            exact_jump = (exact_hi - hi) - (exact_lo - lo)
            assert (out_hi - hi) - (out_lo - lo) == pytest.approx(exact_jump, abs=1e-8)


def test_singular_sample_raises():
    s = SuspensionData(base=IET([F(1, 3), F(2, 3)], Permutation((2, 1))), b=(1.0, -1.0))
    surf = suspend(s)
    tr = standard_transversal(s)
    with pytest.raises(SingularTrajectory):
        vertical_first_return(surf, tr, float(F(1, 3)))


def test_local_product_identity_shear_and_samples():
    for s in shipped_suspensions():
        assert verify_local_product(s, [0.0]) <= 1e-12
        lim = 0.5 * s.max_shear()
        assert verify_local_product(s, [-lim, lim / 3, lim]) <= 1e-9


def test_local_product_rejects_shear_beyond_positivity():
    s = shipped_suspensions()[0]
    with pytest.raises(ValueError):
        verify_local_product(s, [1.5 * s.max_shear()])


def test_short_interval_connection_bounds():
    s = SuspensionData(base=IET.circle_rotation(F(fib(20), fib(21))), b=(1.0, -1.0))
    h_max = max(s.heights)
    top_offset = max(abs(sum(s.b[:j])) for j in range(len(s.b)))
    for n in (1, 10, 100):
        sc = short_interval_saddle_connection(s, n)  # verify=True traces it
        eps_n = s.base.partition_report(n).epsilon_n
        assert abs(sc.holonomy.real) == pytest.approx(float(eps_n), rel=1e-6)
        assert 0 < abs(sc.holonomy.imag) <= n * h_max + top_offset
        # renormalizing by g_{log(n/sqrt(eps))} leaves max-norm <= C sqrt(eps)
        eps = float(n * eps_n)
        g = math.log(n / math.sqrt(eps))
        v = sc.holonomy
        renorm = max(abs(math.exp(g) * v.real), abs(math.exp(-g) * v.imag))
        assert renorm <= (1 + h_max + top_offset) * math.sqrt(eps)


def test_short_interval_connection_matches_enumeration():
    s = SuspensionData(base=IET.circle_rotation(F(fib(12), fib(13))), b=(1.0, -1.0))
    sc = short_interval_saddle_connection(s, 6)
    surf = suspend(s)
    found = surf.saddle_connections(abs(sc.holonomy) * 1.01)
    assert any(abs(f.holonomy - sc.holonomy) <= 1e-9
               or abs(f.holonomy + sc.holonomy) <= 1e-9 for f in found)


def test_json_round_trip():
    s = shipped_suspensions()[3]
    again = SuspensionData.from_json(s.to_json())
    assert again.base.lengths == s.base.lengths
    assert again.b == s.b and again.heights == s.heights
