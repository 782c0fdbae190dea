import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cheby.directsum import block_project, build_matched_product, random_directsum_instance
from cheby.domain import Polytope, WholeSpace
from cheby.errors import InstanceError
from cheby.norms import MaxNorm, PNorm
from cheby.p1 import (P1Context, check_containment, estimate_delta, geometric_grid, p1_curve,
                      s_value)

PAIR1 = [[1], [-1]]


def test_s_value_examples():
    assert s_value(MaxNorm(1), WholeSpace(1), PAIR1, 0.2).value == pytest.approx(0.2)
    assert s_value(MaxNorm(1), WholeSpace(1), PAIR1, 0.0).value == 0
    s = s_value(MaxNorm(2), WholeSpace(2), [[1, 0], [-1, 0]], 0.3)
    assert s.value == pytest.approx(0.3)
    assert s.status == "exact"


def test_s_value_rejects_negative_delta():
    with pytest.raises(InstanceError):
        s_value(MaxNorm(1), WholeSpace(1), PAIR1, -0.1)


def test_estimate_delta_example():
    est = estimate_delta(MaxNorm(1), WholeSpace(1), PAIR1, 0.1)
    assert est.certified
    assert est.delta == pytest.approx(0.05)
    assert est.s_at_delta == pytest.approx(0.05)


def test_estimate_delta_huge_eps_takes_top_of_grid():
    V = Polytope.box([-3, -3], [3, 3])
    est = estimate_delta(MaxNorm(2), V, [[1, 0], [-1, 0]], 100.0)
    assert est.delta == 100.0


def test_containment_examples():
    c = check_containment(MaxNorm(1), WholeSpace(1), PAIR1, 0.05, 0.1)
    assert c.holds and c.witness is None
    c = check_containment(MaxNorm(1), WholeSpace(1), PAIR1, 0.2, 0.1)
    assert not c.holds
    assert abs(c.witness[0]) == pytest.approx(0.2)
    assert check_containment(MaxNorm(2), WholeSpace(2), [[0, 0], [2, 1]], 0.0, 1e-6).holds


def test_geometric_grid():
    np.testing.assert_allclose(geometric_grid(1.0, 4), [1, 0.5, 0.25, 0.125])


def test_sampled_path_for_p_norms():
    ctx = P1Context(PNorm(2, 2), WholeSpace(2), [[1, 0], [-1, 0]], samples=3000)
    vals = [ctx.s_value(d) for d in (0.2, 0.05, 0.0125)]
    assert all(v.status == "sampled" and v.samples > 0 for v in vals)
    # Euclidean: d(v, 0) <= sqrt((1 + delta)^2 - 1), which shrinks with delta
    for v in vals:
        assert v.value <= np.sqrt((1 + v.delta) ** 2 - 1) + 1e-9
    assert vals[0].value > vals[-1].value


def test_curve_records_estimates():
    curve = p1_curve(MaxNorm(1), WholeSpace(1), PAIR1, geometric_grid(1.0, 6), eps=[0.1, 0.3])
    assert curve.status == "exact" and curve.monotone
    assert set(curve.estimates) == {0.1, 0.3}


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1))
def test_curve_monotone_and_vanishing(seed):
    rng = np.random.default_rng(seed)
    inst = random_directsum_instance(rng)
    curve = p1_curve(inst.norm, inst.V, inst.B, list(geometric_grid(1.0, 20)) + [0.0])
    assert curve.monotone
    assert curve.values[0] <= 1e-9
    # polyhedral S is linear near 0, so the bottom of the grid halves with delta
    assert curve.values[1] <= 0.5 * curve.values[2] + 1e-9


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 1.0), st.floats(0.01, 1.0))
def test_containment_consistent_with_s_value(seed, delta, eps):
    inst = random_directsum_instance(np.random.default_rng(seed))
    s = s_value(inst.norm, inst.V, inst.B, delta).value
    holds = check_containment(inst.norm, inst.V, inst.B, delta, eps).holds
    assert holds == (s <= eps + 1e-9)


@settings(max_examples=30)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 1.0))
def test_s_bounded_by_enlargement_diameter(seed, delta):
    inst = random_directsum_instance(np.random.default_rng(seed))
    ctx = P1Context(inst.norm, inst.V, inst.B)
    s = ctx.s_value(delta).value
    E = ctx.enlargement(delta)
    if E.is_bounded():
        V = E.vertices()
        diam = max(float(np.max(inst.norm(V - v))) for v in V)
        assert s <= diam + 1e-9


def test_matched_product_estimate_dominates_blocks():
    rng = np.random.default_rng(5)
    for _ in range(10):
        d1, d2 = (int(x) for x in rng.integers(1, 3, size=2))
        B1 = rng.uniform(-2, 2, size=(int(rng.integers(2, 5)), d1))
        inst = build_matched_product(B1, MaxNorm(d1), WholeSpace(d1), WholeSpace(d2),
                                     MaxNorm(d2))
        B2 = block_project(inst.B, d1, 2)
        for eps in (0.05, 0.2):
            full = estimate_delta(inst.norm, inst.V, inst.B, eps).delta
            e1 = estimate_delta(inst.n1, inst.V1, B1, eps).delta
            e2 = estimate_delta(inst.n2, inst.V2, B2, eps).delta
            assert full >= min(e1, e2)


def test_direct_sum_curve_bounded_by_block_curves():
    rng = np.random.default_rng(8)
    deltas = geometric_grid(0.5, 8)
    for _ in range(10):
        d1, d2 = (int(x) for x in rng.integers(1, 3, size=2))
        B1 = rng.uniform(-2, 2, size=(int(rng.integers(2, 5)), d1))
        inst = build_matched_product(B1, MaxNorm(d1), WholeSpace(d1), WholeSpace(d2),
                                     MaxNorm(d2))
        full = P1Context(inst.norm, inst.V, inst.B)
        c1 = P1Context(inst.n1, inst.V1, B1)
        c2 = P1Context(inst.n2, inst.V2, block_project(inst.B, d1, 2))
        for d in deltas:
            lhs = full.s_value(d).value
            assert lhs <= c1.s_value(d).value + c2.s_value(d).value + 1e-9
