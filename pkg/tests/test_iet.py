import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import three_distance_min_gap, three_distance_min_gap_brute
from teichlab.errors import NotIrreducible, NotTypeW, OutOfDomain
from teichlab.iet import IET
from teichlab.permutations import Permutation, basis_vector, build_q_form, q_evaluate


def fib(n):
    a, b = 1, 1
    for _ in range(n - 1):
        a, b = b, a + b
    return a


def golden_rotation(k=20):
    return IET.circle_rotation(F(fib(k), fib(k + 1)))


@pytest.fixture
def third():
    return IET([F(1, 3), F(2, 3)], Permutation((2, 1)))


def test_evaluate_hand_values(third):
    assert third.evaluate(F(1, 6)) == F(5, 6)
    assert third.evaluate(F(1, 2)) == F(1, 6)
    # T(0) = sum of lengths of intervals mapped below image of I_1
    assert third.evaluate(0) == F(2, 3)


def test_evaluate_domain_checks(third):
    with pytest.raises(OutOfDomain):
        third.evaluate(F(-1, 10))
    with pytest.raises(OutOfDomain):
        third.evaluate(F(1))
    with pytest.raises(TypeError):
        third.evaluate(0.25)


def test_reducible_rejected():
    with pytest.raises(NotIrreducible):
        IET([F(1, 2), F(1, 2)], Permutation((1, 2)))


def test_inverse_hand_value(third):
    assert third.evaluate_inverse(F(5, 6)) == F(1, 6)
    # preimage of 0 is the left endpoint of the interval sent to the bottom
    i = third.perm.inverse(1)
    assert third.evaluate_inverse(0) == third.betas[i - 1]


@given(st.integers(min_value=0, max_value=10**9))
@settings(max_examples=300)
def test_round_trip_random_rationals(k):
    t = IET([F(1, 4), F(1, 3), F(5, 12)], Permutation((3, 1, 2)))
    x = F(k, 10**9 + 7) * t.total
    assert t.evaluate_inverse(t.evaluate(x)) == x
    assert t.evaluate(t.evaluate_inverse(x)) == x


def test_round_trip_ten_thousand_points():
    import random

    rng = random.Random(41)
    t = IET([F(2, 7), F(3, 14), F(1, 4), F(1, 4)], Permutation((2, 4, 1, 3)))
    den = 2**31 - 1
    for _ in range(10**4):
        x = F(rng.randrange(den), den) * t.total
        assert t.evaluate_inverse(t.evaluate(x)) == x


def test_measure_preserved_as_multiset():
    t = IET([F(1, 4), F(1, 3), F(5, 12)], Permutation((3, 1, 2)))
    image_lengths = sorted(t._gammas[k + 1] - t._gammas[k] for k in range(t.d))
    assert image_lengths == sorted(t.lengths)


def test_translation_equals_q_form():
    for images in [(2, 1), (3, 2, 1), (3, 1, 2), (4, 3, 2, 1), (2, 4, 1, 3)]:
        p = Permutation(images)
        lengths = [F(i + 2, 11) for i in range(p.d)]
        t = IET(lengths, p)
        q = build_q_form(p)
        for i in range(1, p.d + 1):
            x = t.betas[i - 1]
            assert t.evaluate(x) - x == q_evaluate(q, lengths, basis_vector(p.d, i))


def test_partition_depth_one(third):
    r = third.partition_report(1)
    assert r.cut_points == (F(0), F(1, 3))
    assert r.epsilon_n == F(1, 3)


def test_rational_rotation_collides_at_period():
    t = IET.circle_rotation(F(2, 3))
    assert t.partition_report(2).epsilon_n > 0
    r = t.partition_report(3)
    assert r.epsilon_n == 0 and r.collision is not None
    assert t.partition_report(5).epsilon_n == 0


def test_idoc_examples():
    half = IET([F(1, 2), F(1, 2)], Permutation((2, 1)))
    v = half.check_idoc(10)
    assert v.status == "CollisionAt" and v.collision.layer == 2

    t = IET([F(1, 3), F(2, 3)], Permutation((2, 1)))
    v = t.check_idoc(10)
    assert v.status == "CollisionAt" and v.collision.layer == 3
    # re-evaluating the orbit reproduces the collision exactly
    pt = t.betas[v.collision.orbit]
    for _ in range(v.collision.layer):
        pt = t.evaluate(pt)
    assert pt == v.collision.value


def test_idoc_random_large_denominators():
    # exact collisions require a linear relation; random 64-bit data avoids them
    import random

    rng = random.Random(12345)
    ok = 0
    trials = 100
    for _ in range(trials):
        scale = 2**64
        nums = [rng.randrange(scale // 4, scale) for _ in range(3)]
        t = IET([F(n, sum(nums)) for n in nums], Permutation((3, 1, 2)))
        if t.check_idoc(1000).status == "NoCollisionUpToDepth":
            ok += 1
    assert ok >= 95


def test_epsilon_matches_three_distance_oracle():
    import random

    rng = random.Random(2024)
    for _ in range(6):
        q = rng.randrange(10**5, 10**6)
        p = rng.randrange(1, q)
        g = math.gcd(p, q)
        p, q = p // g, q // g
        alpha = F(p, q)
        t = IET.circle_rotation(alpha)
        n_max = 2000
        eps = t.epsilon_sequence(n_max)
        for n in range(1, n_max + 1):
            assert eps[n - 1] == three_distance_min_gap(alpha, n)


def test_three_distance_oracle_against_brute_force():
    for q in range(2, 40):
        for p in range(1, q):
            if math.gcd(p, q) != 1:
                continue
            alpha = F(p, q)
            for n in range(1, q + 2):
                assert three_distance_min_gap(alpha, n) == \
                    three_distance_min_gap_brute(alpha, n)


def test_partition_report_consistent_with_bulk():
    t = golden_rotation(18)
    eps = t.epsilon_sequence(300)
    for n in (1, 7, 50, 299):
        r = t.partition_report(n)
        assert r.epsilon_n == eps[n - 1]
        assert len(r.cut_points) <= n * t.d
        assert r.n_epsilon_n == n * r.epsilon_n


def test_epsilon_monotone_and_cardinality():
    t = IET([F(1, 4), F(1, 3), F(5, 12)], Permutation((3, 1, 2)))
    eps = t.epsilon_sequence(200)
    assert all(a >= b for a, b in zip(eps, eps[1:]))
    r = t.partition_report(200)
    assert len(r.cut_points) <= 200 * t.d
    assert r.epsilon_n * len(r.cut_points) <= t.total


def test_short_intervals_diagnostic_shapes():
    t = golden_rotation(16)
    diag = t.short_intervals_diagnostic(500, schedule="geometric", points=12)
    assert diag[-1][0] == 500
    # golden rotations keep n*eps_n bounded below before the period resolves
    assert min(v for _, v in diag) >= F(1, 5)

    lin = t.short_intervals_diagnostic(100, schedule="linear", points=10)
    assert [n for n, _ in lin] == list(range(10, 101, 10))


def test_liouville_like_rotation_has_short_intervals():
    # truncated Liouville chain: huge quotient jump after denominator 100
    alpha = F(11, 100) + F(1, 10**8)
    t = IET.circle_rotation(alpha)
    diag = dict(t.short_intervals_diagnostic(2000, schedule="linear", points=40))
    assert min(diag.values()) < F(1, 1000)


WM_CERTIFIED_LENGTHS = [F(v, 5353) for v in (1306, 1007, 792, 1901, 347)]


def test_weak_mixing_verdict_certified_example():
    t = IET(WM_CERTIFIED_LENGTHS, Permutation.reversal(5))
    rep = t.weak_mixing_verdict(depth=1000, n_max=1000, threshold=F(1, 20))
    assert rep.verdict == "WeakMixingCertified"
    assert rep.evidence["ergodicity_verified"] is False
    assert rep.evidence["idoc_status"] == "NoCollisionUpToDepth"
    assert rep.evidence["tail_max_n_eps"] >= 0.05


def test_weak_mixing_verdict_rotation_like_class_is_inconclusive():
    # (3,2,1) suspends to genus 1: its partitions always develop short
    # intervals, so the sufficient criterion cannot fire
    g = F(fib(20), fib(21))
    t = IET([F(1), g, g * g], Permutation((3, 2, 1)))
    rep = t.weak_mixing_verdict(depth=1000, n_max=1000, threshold=F(1, 20))
    assert rep.verdict == "Inconclusive"


def test_weak_mixing_verdict_requires_type_w():
    t = IET.circle_rotation(F(fib(18), fib(19)))
    with pytest.raises(NotTypeW):
        t.weak_mixing_verdict(depth=10, n_max=10, threshold=F(1, 20))


def test_weak_mixing_collision_fails_numerically():
    t = IET([F(1, 4), F(1, 4), F(1, 2)], Permutation((3, 2, 1)))
    rep = t.weak_mixing_verdict(depth=50, n_max=50, threshold=F(1, 20))
    assert rep.verdict == "CriterionFailsNumerically"
    assert "collision" in rep.evidence


def test_json_round_trip(third):
    data = third.to_json()
    assert data == {"lengths": ["1/3", "2/3"], "perm": [2, 1]}
    again = IET.from_json(data)
    assert again.lengths == third.lengths and again.perm == third.perm
