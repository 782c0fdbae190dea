import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cheby.domain import (AffineSubspace, BlockProduct, HPolytope, Polytope, SubspaceBall,
                          WholeSpace, ball_intersection, contains, distance_to_set,
                          max_distance_over, polytope_hausdorff, scale_set, to_polytope)
from cheby.errors import InstanceError
from cheby.norms import MaxNorm, PNorm


def test_box_vertices():
    V = Polytope.box([0, 0], [1, 2]).vertices()
    assert V.shape == (4, 2)
    assert {tuple(v) for v in np.round(V, 12)} == {(0, 0), (1, 0), (0, 2), (1, 2)}


def test_point_and_empty():
    P = Polytope.point([1.0, -1.0])
    np.testing.assert_allclose(P.vertices(), [[1, -1]])
    assert Polytope.empty(2).is_empty()
    assert Polytope([[1], [-1]], [0, -1]).is_empty()


def test_unbounded_detected():
    assert not Polytope([[1, 0]], [1]).is_bounded()
    assert Polytope.box([0], [1]).is_bounded()


def test_hpolytope_triangle():
    P = HPolytope([[-1, 0], [0, -1], [1, 1]], [0, 0, 1])
    assert len(P.vertices()) == 3


def test_mismatched_rows_rejected():
    with pytest.raises(InstanceError):
        Polytope([[1, 0]], [1, 2])


def test_contains_membership():
    assert contains(WholeSpace(2), [5, 5])
    assert contains(AffineSubspace([[1, 1]], [1]), [0.25, 0.75])
    assert not contains(AffineSubspace([[1, 1]], [1]), [0.25, 0.5])
    ball = SubspaceBall([[1, 0]], 2.0, MaxNorm(2))
    assert contains(ball, [2, 0]) and not contains(ball, [1, 0.1]) and not contains(ball, [3, 0])
    prod = BlockProduct([Polytope.box([0], [1]), WholeSpace(1)])
    assert contains(prod, [0.5, 100]) and not contains(prod, [2, 0])
    with pytest.raises(InstanceError):
        contains(WholeSpace(2), [1, 2, 3])


def test_subspace_ball_polytope():
    P = to_polytope(SubspaceBall([[1, 1]], 1.0, MaxNorm(2)))
    V = P.vertices()
    assert {tuple(v) for v in np.round(V, 12)} == {(1, 1), (-1, -1)}


def test_distance_to_set():
    n = MaxNorm(2)
    assert distance_to_set(n, [3, 0], Polytope.box([0, 0], [1, 1])) == 2
    assert distance_to_set(n, [2, 0], AffineSubspace([[1, -1]], [0])) == pytest.approx(1)
    assert distance_to_set(PNorm(2, 2), [2, 0], AffineSubspace([[1, -1]], [0])) == \
        pytest.approx(np.sqrt(2))


def test_max_distance_and_hausdorff():
    n = MaxNorm(2)
    P = Polytope.box([0, 0], [2, 2])
    Q = Polytope.box([0, 0], [1, 1])
    val, wit = max_distance_over(n, P, Q)
    assert val == 1
    assert max_distance_over(n, Q, P)[0] == 0
    assert polytope_hausdorff(n, P, Q) == (1, 1, 0)


def test_ball_intersection_box_collapse():
    n = MaxNorm(2)
    F = [[0, 0], [2, 0]]
    E = ball_intersection(n, F, 1.0, WholeSpace(2))
    lo, hi = E.box_bounds()
    np.testing.assert_allclose(lo, [1, -1])
    np.testing.assert_allclose(hi, [1, 1])
    assert ball_intersection(n, F, 0.9, WholeSpace(2)).is_empty()


def test_scale_set():
    P = scale_set(Polytope.box([0], [1]), 3)
    np.testing.assert_allclose(np.sort(P.vertices().ravel()), [0, 3])
    assert scale_set(SubspaceBall([[1]], 2, MaxNorm(1)), 3).lam == 6


@given(st.lists(st.floats(-5, 5), min_size=2, max_size=2),
       st.lists(st.floats(0.01, 3), min_size=2, max_size=2),
       st.lists(st.floats(-9, 9), min_size=2, max_size=2))
def test_box_distance_matches_lp(lo, size, x):
    lo = np.array(lo)
    hi = lo + np.array(size)
    P = Polytope.box(lo, hi)
    # the same box written with a redundant row so the LP path is taken
    Q = Polytope(np.vstack([P.G, [[1, 1]]]), np.concatenate([P.h, [hi.sum() + 1]]))
    n = MaxNorm(2)
    assert distance_to_set(n, x, P) == pytest.approx(distance_to_set(n, x, Q), abs=1e-9)
