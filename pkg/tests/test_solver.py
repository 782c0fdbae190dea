import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cheby import solver
from cheby.domain import AffineSubspace, Polytope, SubspaceBall, WholeSpace, distance_to_set
from cheby.errors import InstanceError
from cheby.norms import DirectSum, MaxNorm, PNorm, farthest_radius


def _verts(sol):
    return {tuple(v) for v in np.round(sol.polytope.vertices(), 9) + 0.0}


def test_polyhedral_symmetric_pair():
    sol = solver.solve_polyhedral(MaxNorm(2), WholeSpace(2), [[1, 0], [-1, 0]])
    assert sol.radius == pytest.approx(1)
    assert sol.status == "exact"
    assert _verts(sol) == {(0, -1), (0, 1)}


def test_polyhedral_affine_line():
    sol = solver.solve_polyhedral(MaxNorm(2), AffineSubspace([[0, 1]], [1]), [[0, 0]])
    assert sol.radius == pytest.approx(1)
    assert _verts(sol) == {(-1, 1), (1, 1)}


def test_polyhedral_triangle_against_pinned(pinned):
    e = pinned["max2-triangle"]
    sol = solver.solve_polyhedral(MaxNorm(2), WholeSpace(2), e["instance"]["points"])
    assert abs(sol.radius - e["rad_hat"]) <= e["h"] * e["c"]
    assert sol.polytope.contains([1, 1])


def test_euclidean_examples():
    s = solver.solve_uniformly_convex(PNorm(2, 2), WholeSpace(2), [[1, 0], [-1, 0]])
    assert s.radius == pytest.approx(1, abs=1e-7)
    np.testing.assert_allclose(s.point, [0, 0], atol=1e-6)
    s = solver.solve_uniformly_convex(PNorm(2, 2), AffineSubspace([[0, 1]], [1]), [[0, 0]])
    assert s.radius == pytest.approx(1, abs=1e-7)
    np.testing.assert_allclose(s.point, [0, 1], atol=1e-6)


def test_p4_center_on_axis(pinned):
    e = pinned["p4-three"]
    s = solver.solve_uniformly_convex(PNorm(4, 2), WholeSpace(2), e["instance"]["points"])
    assert abs(s.radius - e["rad_hat"]) <= e["h"] * e["c"]
    assert s.radius == pytest.approx(1, abs=1e-7)
    assert abs(s.point[0]) <= 1e-6
    # the radius is flat to fourth order along the axis, so only the oracle range is pinned
    assert e["center_lo"][1] - 1e-9 <= s.point[1] <= e["center_hi"][1] + 1e-9


def test_dispatch_and_dimension_errors():
    assert solver.solve(MaxNorm(1), WholeSpace(1), [[1], [-1]]).kind == "polytope"
    assert solver.solve(PNorm(3, 1), WholeSpace(1), [[1], [-1]]).kind == "point"
    with pytest.raises(InstanceError):
        solver.solve(MaxNorm(2), WholeSpace(2), [[1, 2, 3]])


@pytest.mark.parametrize("norm", [MaxNorm(1), PNorm(2, 1)])
def test_empty_constraint_is_instance_error(norm):
    V = Polytope([[1], [-1]], [0, -1])
    with pytest.raises(InstanceError):
        solver.solve(norm, V, [[0]])


# -- the truncated-move iteration --------------------------------------------

def test_amir_midpoint():
    s = solver.amir_iterate(PNorm(2, 1), [[0.5], [-0.5]])
    assert s.radius == pytest.approx(0.5, abs=1e-8)
    assert abs(s.point[0]) <= 1e-7
    assert s.trace.violations() == []


def test_amir_two_blocks():
    n = DirectSum((PNorm(2, 1), PNorm(2, 1)))
    s = solver.amir_iterate(n, [[1, 0], [-1, 0]])
    assert s.radius == pytest.approx(1, abs=1e-8)
    assert s.trace.violations() == []
    assert abs(s.point[0]) <= 1e-7


def test_amir_disk_projection():
    n = PNorm(2, 2)
    s = solver.amir_iterate(n, [[2, 0]])
    assert s.radius == pytest.approx(1, abs=1e-7)
    # a radius gap of tol only pins the point to about sqrt(tol) along the boundary
    np.testing.assert_allclose(s.point, [1, 0], atol=1e-3)
    disk = SubspaceBall(np.eye(2), 1.0, n)
    assert distance_to_set(n, [2, 0], disk) == pytest.approx(s.radius, abs=1e-6)


def test_amir_rejects_bad_eps0():
    with pytest.raises(InstanceError):
        solver.amir_iterate(PNorm(2, 1), [[0.5]], eps0=3)


def test_amir_steps_shrink_geometrically():
    n = DirectSum((PNorm(2, 2), PNorm(4, 2)))
    rng = np.random.default_rng(3)
    s = solver.amir_iterate(n, rng.normal(size=(4, 4)))
    steps = [st.step for st in s.trace.steps]
    caps = [2 * s.trace.eps0 / 2 ** st.n for st in s.trace.steps]
    assert all(a <= b + 1e-9 for a, b in zip(steps, caps))
    assert s.converged


# -- enlargement sets ---------------------------------------------------------

def test_enlargement_examples():
    E = solver.enlargement(MaxNorm(1), WholeSpace(1), [[1], [-1]], 0.2)
    np.testing.assert_allclose(np.sort(E.vertices().ravel()), [-0.2, 0.2])
    E = solver.enlargement(MaxNorm(2), WholeSpace(2), [[1, 0], [-1, 0]], 0.5)
    lo, hi = E.box_bounds()
    np.testing.assert_allclose(lo, [-0.5, -1.5])
    np.testing.assert_allclose(hi, [0.5, 1.5])


def test_enlargement_at_zero_is_center():
    F = [[0, 0], [2, 0], [0, 2]]
    E = solver.enlargement(MaxNorm(2), WholeSpace(2), F, 0.0)
    C = solver.solve_polyhedral(MaxNorm(2), WholeSpace(2), F).polytope
    assert {tuple(v) for v in np.round(E.vertices(), 9)} == \
        {tuple(v) for v in np.round(C.vertices(), 9)}


def test_sampled_enlargement_is_feasible():
    n = PNorm(2, 2)
    F = [[1, 0], [-1, 0], [0, 1]]
    S = solver.enlargement(n, WholeSpace(2), F, 0.1, count=2000)
    rad = solver.radius(n, WholeSpace(2), F)
    assert S.shape[0] > 10
    assert np.all([farthest_radius(n, x, F) <= rad + 0.1 + 1e-9 for x in S])


# -- properties ---------------------------------------------------------------

points2 = st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=5)


@given(points2, st.floats(0.1, 10))
def test_radius_is_homogeneous(F, lam):
    F = np.array(F)
    n = MaxNorm(2)
    r1 = solver.radius(n, WholeSpace(2), F)
    r2 = solver.radius(n, WholeSpace(2), lam * F)
    assert r2 == pytest.approx(lam * r1, rel=1e-9, abs=1e-9)


@given(points2)
def test_center_points_attain_radius(F):
    n = MaxNorm(2)
    sol = solver.solve_polyhedral(n, WholeSpace(2), F)
    for v in sol.representatives():
        assert farthest_radius(n, v, F) == pytest.approx(sol.radius, abs=1e-8)


@given(points2, st.floats(0, 2), st.floats(0, 2))
def test_enlargement_is_nested(F, d1, d2):
    lo_d, hi_d = sorted([d1, d2])
    n = MaxNorm(2)
    small = solver.enlargement(n, WholeSpace(2), F, lo_d)
    big = solver.enlargement(n, WholeSpace(2), F, hi_d)
    assert all(big.contains(v, 1e-9) for v in small.vertices())


@settings(max_examples=25)
@given(st.lists(st.tuples(st.floats(-3, 3), st.floats(-3, 3)), min_size=1, max_size=4),
       st.sampled_from([1.5, 2.0, 4.0]))
def test_uniformly_convex_beats_samples(F, p):
    """No random feasible point does better than the solver's radius."""
    n = PNorm(p, 2)
    F = np.array(F)
    sol = solver.solve_uniformly_convex(n, WholeSpace(2), F)
    rng = np.random.default_rng(0)
    cand = sol.point + rng.normal(scale=0.5, size=(200, 2))
    best = min(farthest_radius(n, c, F) for c in cand)
    assert sol.radius <= best + 1e-7
    assert sol.radius >= solver.radius(MaxNorm(2), WholeSpace(2), F) - 1e-7
