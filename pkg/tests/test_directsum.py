import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cheby import solver
from cheby.directsum import (DirectSumInstance, MSummandInstance, block_project,
                             build_matched_product, case_label, center_directsum,
                             msummand_solve, radius_directsum, radius_split_defect,
                             random_directsum_instance, random_msummand_instance)
from cheby.domain import BlockProduct, Polytope, WholeSpace, vertex_set_distance
from cheby.errors import InstanceError
from cheby.norms import DirectSum, MaxNorm, PNorm, hausdorff_finite

N11 = DirectSum((MaxNorm(1), MaxNorm(1)))
R1xR1 = BlockProduct([WholeSpace(1), WholeSpace(1)])


def _verts(P):
    return {tuple(v) for v in np.round(P.vertices(), 9) + 0.0}


def test_block_project():
    np.testing.assert_array_equal(block_project([[1, 0, 5]], 2, 1).points, [[1, 0]])
    np.testing.assert_array_equal(block_project([[1, 0, 5]], 2, 2).points, [[5]])
    assert sorted(block_project([[1, 2], [3, 4]], 1, 2).points.ravel()) == [2, 4]
    with pytest.raises(InstanceError):
        block_project([[1, 2]], 1, 3)


def test_radius_examples():
    assert radius_directsum(DirectSumInstance(N11, R1xR1, [[1, 0], [-1, 2]])) == (1, 1, 1)
    r = radius_directsum(DirectSumInstance(N11, R1xR1, [[0.5, 0], [-0.5, 2]]))
    assert r == pytest.approx((0.5, 1, 1))


def test_center_examples():
    c = center_directsum(DirectSumInstance(N11, R1xR1, [[1, 0], [-1, 2]]))
    assert _verts(c.polytope) == {(0, 1)}
    c = center_directsum(DirectSumInstance(N11, R1xR1, [[0.5, 0], [-0.5, 2]]))
    assert _verts(c.polytope) == {(-0.5, 1), (0.5, 1)}


def test_case_label():
    assert case_label(1, 1 + 1e-10) == "equal"
    assert case_label(0.5, 1) == "r1<r2"
    assert case_label(2, 1) == "r2<r1"


def test_instance_validation():
    with pytest.raises(InstanceError):
        DirectSumInstance(MaxNorm(2), R1xR1, [[0, 0]])
    with pytest.raises(InstanceError):
        DirectSumInstance(N11, BlockProduct([WholeSpace(2), WholeSpace(1)]), [[0, 0]])


def test_matched_product_examples():
    inst = build_matched_product([[1], [-1]], MaxNorm(1), WholeSpace(1), WholeSpace(1),
                                 MaxNorm(1))
    assert sorted(block_project(inst.B, 1, 2).points.ravel()) == [-1, 1]
    r1, r2, _ = radius_directsum(inst)
    assert r1 == r2 == 1
    inst = build_matched_product([[0.5], [-0.5]], MaxNorm(1), WholeSpace(1), WholeSpace(1),
                                 MaxNorm(1))
    assert sorted(block_project(inst.B, 1, 2).points.ravel()) == [-0.5, 0.5]


def test_matched_product_needs_room():
    with pytest.raises(InstanceError):
        build_matched_product([[1]], MaxNorm(1), WholeSpace(1), Polytope.point([0]), MaxNorm(1))
    with pytest.raises(InstanceError):
        build_matched_product([[1]], MaxNorm(1), WholeSpace(1), Polytope.box([1], [2]),
                              MaxNorm(1))


def test_matched_product_radii_equal_on_random_sets():
    rng = np.random.default_rng(11)
    for _ in range(50):
        d1, d2 = rng.integers(1, 4, size=2)
        B1 = rng.uniform(-2, 2, size=(rng.integers(1, 5), d1))
        inst = build_matched_product(B1, MaxNorm(int(d1)), WholeSpace(int(d1)),
                                     WholeSpace(int(d2)), MaxNorm(int(d2)))
        r1, r2, _ = radius_directsum(inst)
        assert r1 == pytest.approx(r2, abs=1e-12)


def test_matched_product_with_p_block():
    inst = build_matched_product([[1, 0], [-1, 0]], PNorm(2, 2), WholeSpace(2), WholeSpace(2),
                                 PNorm(3, 2))
    r1, r2, _ = radius_directsum(inst)
    assert r1 == pytest.approx(r2, abs=1e-7)


def test_msummand_examples():
    Y = WholeSpace(1)
    res = msummand_solve(MSummandInstance(MaxNorm(1), MaxNorm(1), Y, [[0, 0.5], [2, -0.5]]))
    assert res.solution.radius == 1 and res.case == "y-dominated"
    assert _verts(res.solution.polytope) == {(1, 0)}
    res = msummand_solve(MSummandInstance(MaxNorm(1), MaxNorm(1), Y, [[0, 2], [1, -2]]))
    assert res.solution.radius == 2 and res.case == "w-dominated"
    assert _verts(res.solution.polytope) == {(-1, 0), (2, 0)}
    res = msummand_solve(MSummandInstance(MaxNorm(1), MaxNorm(1), Polytope.point([0]),
                                          [[3, 1], [-1, 0.5]]))
    assert res.solution.radius == 3


def test_split_defect_is_zero():
    rng = np.random.default_rng(2)
    for _ in range(20):
        assert radius_split_defect(random_directsum_instance(rng), seed=1) <= 1e-12


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1))
def test_directsum_agrees_with_full_lp(seed):
    inst = random_directsum_instance(np.random.default_rng(seed))
    r1, r2, rad = radius_directsum(inst)
    full = solver.solve_polyhedral(inst.norm, inst.V, inst.B)
    assert rad == pytest.approx(full.radius, abs=1e-9)
    ours = center_directsum(inst)
    assert vertex_set_distance(inst.norm, ours.polytope, full.polytope) <= 1e-7
    # product of block centers sits inside the center set
    s1 = solver.solve(inst.n1, inst.V1, block_project(inst.B, inst.split, 1))
    s2 = solver.solve(inst.n2, inst.V2, block_project(inst.B, inst.split, 2))
    for a in s1.polytope.vertices():
        for b in s2.polytope.vertices():
            assert full.polytope.contains(np.concatenate([a, b]), 1e-7)


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1))
def test_projection_contracts_hausdorff(seed):
    rng = np.random.default_rng(seed)
    d1, d2 = rng.integers(1, 4, size=2)
    n = DirectSum((MaxNorm(int(d1)), PNorm(2, int(d2))))
    A = rng.normal(size=(rng.integers(1, 5), d1 + d2))
    B = rng.normal(size=(rng.integers(1, 5), d1 + d2))
    lhs = max(hausdorff_finite(n.blocks[0], A[:, :d1], B[:, :d1]),
              hausdorff_finite(n.blocks[1], A[:, d1:], B[:, d1:]))
    assert lhs <= hausdorff_finite(n, A, B) + 1e-12


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1))
def test_msummand_agrees_with_full_solve(seed):
    inst = random_msummand_instance(np.random.default_rng(seed))
    res = msummand_solve(inst)
    full = solver.solve_polyhedral(inst.norm, inst.full_V, inst.B)
    assert res.solution.radius == pytest.approx(full.radius, abs=1e-9)
    assert res.solution.radius == pytest.approx(max(res.rad_y, res.sup_w), abs=1e-12)
    assert vertex_set_distance(inst.norm, res.solution.polytope, full.polytope) <= 1e-7
