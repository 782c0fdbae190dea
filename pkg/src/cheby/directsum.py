"""Two-block l_inf direct sums X1 (+) X2 and M-summands Y (+) W.

Under the max-of-blocks norm, r((v1, v2), B) = max(r(v1, B1), r(v2, B2))
where Bi is the coordinate projection of B.  Both the radius formula and the
three-case center formula follow from that identity.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import solver
from .domain import (AffineSubspace, BlockProduct, Polytope, SubspaceBall, WholeSpace,
                     ball_intersection, block_parts, contains, product_points)
from .errors import InstanceError
from .norms import (DEFAULT_TOL, DirectSum, MaxNorm, NormSpec, PointSet, as_points,
                    farthest_radius, farthest_radius_many)

TIE_TOL = 1e-9


@dataclass
class DirectSumInstance:
    norm: DirectSum
    V: object
    B: np.ndarray

    def __post_init__(self):
        if not isinstance(self.norm, DirectSum) or len(self.norm.blocks) != 2:
            raise InstanceError("a direct-sum instance needs a 2-block DirectSum norm")
        self.B = as_points(self.B)
        if self.B.shape[1] != self.norm.dim or self.V.dim != self.norm.dim:
            raise InstanceError("instance dimensions disagree with the norm")
        self.V1, self.V2 = block_parts(self.V, self.norm, self.split)

    @property
    def split(self) -> int:
        return self.norm.blocks[0].dim

    @property
    def n1(self) -> NormSpec:
        return self.norm.blocks[0]

    @property
    def n2(self) -> NormSpec:
        return self.norm.blocks[1]


def block_project(B, split: int, i: int) -> PointSet:
    """B(1) or B(2): coordinates before / after ``split``, deduplicated."""
    pts = as_points(B)
    if i == 1:
        return PointSet(pts[:, :split])
    if i == 2:
        return PointSet(pts[:, split:])
    raise InstanceError("block index must be 1 or 2")


def _block_solutions(inst: DirectSumInstance, tol: float):
    B1 = block_project(inst.B, inst.split, 1)
    B2 = block_project(inst.B, inst.split, 2)
    s1 = solver.solve(inst.n1, inst.V1, B1, tol)
    s2 = solver.solve(inst.n2, inst.V2, B2, tol)
    return B1, B2, s1, s2


def radius_directsum(inst: DirectSumInstance, tol: float = DEFAULT_TOL):
    """(r1, r2, rad) with ri the restricted radius of the i-th projection."""
    _, _, s1, s2 = _block_solutions(inst, tol)
    return s1.radius, s2.radius, max(s1.radius, s2.radius)


def radius_split_defect(inst: DirectSumInstance, samples: int = 100, seed: int = 0) -> float:
    """Largest |r(v, B) - max(r(v1, B1), r(v2, B2))| over random v."""
    rng = np.random.default_rng(seed)
    k = inst.split
    lo, hi = inst.B.min(axis=0) - 1.0, inst.B.max(axis=0) + 1.0
    v = rng.uniform(lo, hi, size=(samples, inst.norm.dim))
    full = farthest_radius_many(inst.norm, v, inst.B)
    parts = np.maximum(farthest_radius_many(inst.n1, v[:, :k], inst.B[:, :k]),
                       farthest_radius_many(inst.n2, v[:, k:], inst.B[:, k:]))
    return float(np.max(np.abs(full - parts)))


def center_directsum(inst: DirectSumInstance, tol: float = DEFAULT_TOL,
                     tie_tol: float = TIE_TOL) -> solver.CenterSolution:
    """Center set assembled from the blocks.

    r1 = r2:  cent1 x cent2
    r1 < r2:  {v1 in V1 : r(v1, B1) <= r2} x cent2
    r2 < r1:  cent1 x {v2 in V2 : r(v2, B2) <= r1}
    """
    B1, B2, s1, s2 = _block_solutions(inst, tol)
    r1, r2 = s1.radius, s2.radius
    rad = max(r1, r2)
    if s1.kind == "polytope" and s2.kind == "polytope":
        if abs(r1 - r2) <= tie_tol:
            C1, C2 = s1.polytope, s2.polytope
        elif r1 < r2:
            C1, C2 = ball_intersection(inst.n1, B1, r2, inst.V1, tol), s2.polytope
        else:
            C1, C2 = s1.polytope, ball_intersection(inst.n2, B2, r1, inst.V2, tol)
        # enumerate per block so the product inherits the vertex cache
        C1.vertices(tol)
        C2.vertices(tol)
        return solver.CenterSolution(radius=rad, status="exact", polytope=C1.product(C2),
                                     tol=tol)
    # single-point path: the block centers stay feasible in every case
    pt = np.concatenate([s1.representatives()[0], s2.representatives()[0]])
    status = "exact" if s1.status == s2.status == "exact" else "iterative"
    return solver.CenterSolution(radius=farthest_radius(inst.norm, pt, inst.B), status=status,
                                 point=pt, tol=tol, gap=max(s1.gap, s2.gap))


def case_label(r1: float, r2: float, tie_tol: float = TIE_TOL) -> str:
    if abs(r1 - r2) <= tie_tol:
        return "equal"
    return "r1<r2" if r1 < r2 else "r2<r1"


def _is_trivial(V) -> bool:
    if isinstance(V, Polytope):
        if V.is_bounded():
            verts = V.vertices()
            return verts.shape[0] <= 1
        return False
    if isinstance(V, SubspaceBall):
        return V.basis.shape[0] == 0
    if isinstance(V, AffineSubspace):
        return np.linalg.matrix_rank(V.A) == V.dim
    if isinstance(V, BlockProduct):
        return all(_is_trivial(p) for p in V.parts)
    return False


def build_matched_product(B1, n1: NormSpec, V1, V2, n2: NormSpec,
                          tol: float = DEFAULT_TOL) -> DirectSumInstance:
    """Pair ``B1`` with B2 = {r e, -r e} in X2 so both block radii equal r.

    With 0 in V2 and ||e|| = 1, r((0), B2) = r while any v2 has
    max(||v2 - r e||, ||v2 + r e||) >= r, so rad_V2(B2) = r exactly.
    """
    P1 = as_points(B1)
    if not contains(V2, np.zeros(V2.dim), tol):
        raise InstanceError("V2 must contain the origin to host the matched pair {+-r e}")
    if _is_trivial(V2):
        raise InstanceError("V2 is a single point; the matched construction needs a "
                            "non-trivial second block")
    r = solver.solve(n1, V1, P1, tol).radius
    e = np.zeros(n2.dim)
    e[0] = 1.0
    e /= float(n2(e))
    B2 = np.vstack([r * e, -r * e])
    norm = DirectSum((n1, n2))
    return DirectSumInstance(norm, BlockProduct([V1, V2]), product_points(P1, B2))


# -- M-summands ---------------------------------------------------------------

@dataclass
class MSummandInstance:
    """X = Y (+) W with the max norm; Z a constraint set inside Y, B in X."""

    norm_y: NormSpec
    norm_w: NormSpec
    Z: object
    B: np.ndarray

    def __post_init__(self):
        self.B = as_points(self.B)
        if self.Z.dim != self.norm_y.dim:
            raise InstanceError("Z must live in the Y block")
        if self.B.shape[1] != self.norm_y.dim + self.norm_w.dim:
            raise InstanceError("points must have dim(Y) + dim(W) coordinates")

    @property
    def norm(self) -> DirectSum:
        return DirectSum((self.norm_y, self.norm_w))

    @property
    def full_V(self):
        """Z x {0} as a constraint set of the whole space."""
        k = self.norm_w.dim
        return BlockProduct([self.Z, Polytope.point(np.zeros(k))])

    def y_instance(self) -> np.ndarray:
        return np.asarray(block_project(self.B, self.norm_y.dim, 1).points)


@dataclass
class MSummandResult:
    solution: solver.CenterSolution  # in full coordinates, W part zero
    rad_y: float  # rad_Z(B(1))
    sup_w: float  # sup over B(2) of ||w||
    case: str  # "w-dominated" when sup ||w|| > rad_Z(B(1)), else "y-dominated"


def msummand_solve(inst: MSummandInstance, tol: float = DEFAULT_TOL) -> MSummandResult:
    """rad_Z(B) = max(rad_Z(B(1)), sup ||w||) and the matching center set."""
    k = inst.norm_y.dim
    By = block_project(inst.B, k, 1)
    sup_w = float(np.max(inst.norm_w(inst.B[:, k:])))
    sy = solver.solve(inst.norm_y, inst.Z, By, tol)
    rad = max(sy.radius, sup_w)
    zero = np.zeros(inst.norm_w.dim)
    if sup_w > sy.radius:
        case = "w-dominated"
        if sy.kind == "polytope":
            C = ball_intersection(inst.norm_y, By, sup_w, inst.Z, tol)
            C.vertices(tol)
        else:
            C = None
    else:
        case = "y-dominated"
        C = sy.polytope if sy.kind == "polytope" else None
    if C is not None:
        Wpt = Polytope.point(zero)
        Wpt.vertices(tol)
        sol = solver.CenterSolution(radius=rad, status="exact", polytope=C.product(Wpt), tol=tol)
    else:
        # the Y-center lies in every larger ball intersection
        pt = np.concatenate([sy.point, zero])
        sol = solver.CenterSolution(radius=rad, status=sy.status, point=pt, tol=tol, gap=sy.gap)
    return MSummandResult(sol, sy.radius, sup_w, case)


# -- random instances ---------------------------------------------------------

def random_block_set(rng: np.random.Generator, d: int, kind: str | None = None):
    """A random polyhedral constraint set in R^d that is non-empty."""
    kind = kind or rng.choice(["whole", "box", "affine", "halfspaces"])
    if kind == "whole":
        return WholeSpace(d)
    if kind == "box":
        lo = rng.uniform(-2, 0.5, size=d)
        return Polytope.box(lo, lo + rng.uniform(0.2, 3, size=d))
    if kind == "affine":
        if d == 1:
            return AffineSubspace([[1.0]], [rng.uniform(-1, 1)])
        A = rng.normal(size=(1, d))
        return AffineSubspace(A, A @ rng.uniform(-1, 1, size=d))
    # a few halfspaces around a random interior point, plus a bounding box
    x0 = rng.uniform(-1, 1, size=d)
    G = rng.normal(size=(2, d))
    h = G @ x0 + rng.uniform(0.1, 1.0, size=2)
    box = Polytope.box(-3 * np.ones(d), 3 * np.ones(d))
    return Polytope(np.vstack([G, box.G]), np.concatenate([h, box.h]), dim=d)


def random_directsum_instance(rng: np.random.Generator, max_dim: int = 3,
                              max_points: int = 5) -> DirectSumInstance:
    d1, d2 = rng.integers(1, max_dim + 1, size=2)
    m = int(rng.integers(1, max_points + 1))
    B = rng.uniform(-2, 2, size=(m, d1 + d2))
    if rng.random() < 0.3:
        # push one block's spread up so that r1 != r2 cases appear often
        B[:, :d1] *= rng.uniform(0.1, 3)
    V = BlockProduct([random_block_set(rng, int(d1)), random_block_set(rng, int(d2))])
    return DirectSumInstance(DirectSum((MaxNorm(int(d1)), MaxNorm(int(d2)))), V, B)


def random_msummand_instance(rng: np.random.Generator, max_dim: int = 3,
                             max_points: int = 5) -> MSummandInstance:
    dy, dw = (int(x) for x in rng.integers(1, max_dim + 1, size=2))
    m = int(rng.integers(1, max_points + 1))
    B = rng.uniform(-2, 2, size=(m, dy + dw))
    # vary the size of the W part so both cases occur
    B[:, dy:] *= rng.choice([0.1, 0.5, 1.0, 2.0])
    Z = random_block_set(rng, dy)
    return MSummandInstance(MaxNorm(dy), MaxNorm(dw), Z, B)


__all__ = [
    "DirectSumInstance", "MSummandInstance", "MSummandResult", "block_project",
    "radius_directsum", "radius_split_defect", "center_directsum", "case_label",
    "build_matched_product", "msummand_solve", "random_directsum_instance",
    "random_msummand_instance", "random_block_set",
]
