import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cheby.errors import InstanceError
from cheby.norms import (DirectSum, MaxNorm, PNorm, PointSet, convexity_modulus, deviation,
                         diameter, distance, equivalence_constant, farthest_radius,
                         hausdorff_finite, norm_modulus)

coords = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def norms_of_dim(d):
    opts = [st.just(MaxNorm(d)), st.sampled_from([1.5, 2.0, 3.0, 4.0]).map(lambda p: PNorm(p, d))]
    if d >= 2:
        opts.append(st.integers(1, d - 1).map(
            lambda k: DirectSum((MaxNorm(k), PNorm(2.0, d - k)))))
    return st.one_of(opts)


@st.composite
def norm_and_points(draw, count=3, max_dim=4):
    d = draw(st.integers(1, max_dim))
    n = draw(norms_of_dim(d))
    pts = [draw(arrays(float, d, elements=coords)) for _ in range(count)]
    return n, pts


def test_distance_examples():
    assert distance(MaxNorm(2), [1, 0], [0, -2]) == 2
    assert distance(PNorm(2, 2), [3, 4], [0, 0]) == pytest.approx(5)
    ds = DirectSum((MaxNorm(1), MaxNorm(1)))
    assert distance(ds, [1, 0], [-1, 2]) == 2


def test_distance_dimension_mismatch():
    with pytest.raises(InstanceError):
        distance(MaxNorm(2), [1, 0, 0], [0, 0])


def test_farthest_radius_examples():
    assert farthest_radius(MaxNorm(2), [0, 0], [[1, 0], [0, -2]]) == 2
    assert farthest_radius(PNorm(2, 2), [0, 0], [[1, 0], [-1, 0]]) == pytest.approx(1)
    assert farthest_radius(MaxNorm(2), [0, 1], [[1, 0], [-1, 2]]) == 1


def test_hausdorff_examples():
    n = MaxNorm(2)
    assert hausdorff_finite(n, [[0, 0]], [[1, 0]]) == 1
    A = [[0.3, 1.2], [5, -1]]
    assert hausdorff_finite(n, A, A) == 0
    assert hausdorff_finite(n, [[0, 0], [2, 0]], [[1, 0]]) == 1


def test_one_sided_deviation_is_asymmetric():
    n = MaxNorm(1)
    assert deviation(n, [[0]], [[0], [5]]) == 0
    assert deviation(n, [[0], [5]], [[0]]) == 5


def test_pnorm_large_p_no_overflow():
    n = PNorm(200.0, 3)
    assert n([1e3, 1e3, 0]) == pytest.approx(1e3 * 2 ** (1 / 200))


def test_invalid_p():
    with pytest.raises(InstanceError):
        PNorm(1.0, 2)
    with pytest.raises(InstanceError):
        PNorm(float("inf"), 2)


def test_pointset_dedup():
    ps = PointSet([[0, 0], [0, 1e-13], [1, 1]])
    assert len(ps) == 2
    assert len(PointSet([[0, 0], [0, 1e-11]])) == 2


def test_pointset_rejects_empty_and_nonfinite():
    with pytest.raises(InstanceError):
        PointSet(np.zeros((0, 2)))
    with pytest.raises(InstanceError):
        PointSet([[0, np.nan]])


def test_equivalence_constant():
    assert equivalence_constant(MaxNorm(3)) == 1
    assert equivalence_constant(PNorm(2, 4)) == pytest.approx(2)
    assert equivalence_constant(DirectSum((MaxNorm(2), PNorm(2, 4)))) == pytest.approx(2)


def test_diameter():
    assert diameter(MaxNorm(2), [[0, 0], [2, 1], [1, -1]]) == 2


@given(norm_and_points())
def test_norm_metric_axioms(np_):
    n, (x, y, z) = np_
    dxy, dyx = distance(n, x, y), distance(n, y, x)
    assert dxy == pytest.approx(dyx, abs=1e-9)
    assert distance(n, x, z) <= dxy + distance(n, y, z) + 1e-9
    assert n(2.5 * (x - y)) == pytest.approx(2.5 * dxy, rel=1e-9, abs=1e-9)
    assert distance(n, x, x) == 0


@given(norm_and_points(count=8, max_dim=3), st.integers(1, 4))
def test_radius_is_1_lipschitz_in_hausdorff(np_, k):
    n, pts = np_
    v, A, B = pts[0], np.array(pts[1:1 + k]), np.array(pts[1 + k:])
    lhs = abs(farthest_radius(n, v, A) - farthest_radius(n, v, B))
    assert lhs <= hausdorff_finite(n, A, B) + 1e-9


@given(st.integers(1, 3), st.integers(1, 3), st.data())
def test_direct_sum_is_max_of_blocks(d1, d2, data):
    b1, b2 = MaxNorm(d1), PNorm(3.0, d2)
    n = DirectSum((b1, b2))
    x = data.draw(arrays(float, d1 + d2, elements=coords))
    assert n(x) == max(b1(x[:d1]), b2(x[d1:]))


def test_modulus_examples():
    assert convexity_modulus(2, 1) == pytest.approx(1 - np.sqrt(0.75))
    assert convexity_modulus(2, 1) == pytest.approx(0.1339745962155614)
    assert convexity_modulus(2, 2) == 1
    assert convexity_modulus(4, 1) == pytest.approx(1 - (1 - 0.5 ** 4) ** 0.25)
    assert convexity_modulus(4, 1) == pytest.approx(0.0160052, abs=1e-7)
    assert convexity_modulus(1.5, 1) == pytest.approx(0.5 / 8)


@pytest.mark.parametrize("eps", [0, -1, 2.5])
def test_modulus_domain(eps):
    with pytest.raises(InstanceError):
        convexity_modulus(2, eps)


@pytest.mark.parametrize("p", [1.2, 1.5, 2, 3, 4, 7])
def test_modulus_bounds_and_monotone(p):
    grid = np.linspace(1e-3, 2, 200)
    vals = np.array([convexity_modulus(p, e) for e in grid])
    assert np.all(vals > 0)
    assert np.all(vals <= grid / 2 + 1e-15)
    assert np.all(np.diff(vals) >= -1e-15)


def _random_unit_pairs(p, d, count, rng):
    x = rng.normal(size=(count, d))
    y = rng.normal(size=(count, d))
    # mix in near-parallel pairs so small eps is exercised
    y[: count // 2] = x[: count // 2] + rng.normal(size=(count // 2, d)) * rng.uniform(
        0, 0.5, size=(count // 2, 1))
    n = PNorm(p, d)
    return x / n(x)[:, None], y / n(y)[:, None], n


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
@pytest.mark.parametrize("eps", [0.1, 0.5, 1.0, 1.9])
def test_modulus_sampling_oracle(p, eps):
    """No unit pair at distance >= eps has a midpoint of norm above 1 - delta'."""
    rng = np.random.default_rng(int(p * 100 + eps * 10))
    x, y, n = _random_unit_pairs(p, 3, 100_000, rng)
    far = n(x - y) >= eps
    mid = n((x[far] + y[far]) / 2)
    assert far.sum() > 100
    assert np.max(mid) <= 1 - convexity_modulus(p, eps) + 1e-12


def test_norm_modulus_takes_worst_block():
    n = DirectSum((PNorm(2, 2), PNorm(4, 2)))
    assert norm_modulus(n, 1.0) == convexity_modulus(4, 1.0)
