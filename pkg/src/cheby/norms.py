"""Norms, point sets and the elementary metric quantities built on them.

Three norm kinds are supported: the max-norm, the p-norm for 1 < p < inf,
and the l_inf direct sum of other norms (max over block norms).  Every
evaluation routine is vectorised over leading axes so that grids and
sample clouds can be pushed through in one call.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import InstanceError

DEFAULT_TOL = 1e-9
DEDUP_TOL = 1e-12


@dataclass(frozen=True)
class MaxNorm:
    dim: int

    def __post_init__(self):
        if int(self.dim) < 1:
            raise InstanceError(f"norm dimension must be positive, got {self.dim}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.max(np.abs(x), axis=-1)


@dataclass(frozen=True)
class PNorm:
    p: float
    dim: int

    def __post_init__(self):
        if int(self.dim) < 1:
            raise InstanceError(f"norm dimension must be positive, got {self.dim}")
        if not (1.0 < float(self.p) < np.inf):
            raise InstanceError(f"p must lie strictly between 1 and inf, got {self.p}")

    def __call__(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        # scale by the max entry so large p does not overflow
        m = np.max(x, axis=-1, keepdims=True)
        safe = np.where(m > 0, m, 1.0)
        s = np.sum((x / safe) ** self.p, axis=-1) ** (1.0 / self.p)
        return np.squeeze(m, axis=-1) * s


@dataclass(frozen=True)
class DirectSum:
    """l_inf direct sum of ``blocks``; coordinates are concatenated in order."""

    blocks: tuple

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if len(self.blocks) < 1:
            raise InstanceError("a direct sum needs at least one block")

    @property
    def dim(self) -> int:
        return sum(b.dim for b in self.blocks)

    @property
    def offsets(self) -> list[int]:
        out, k = [0], 0
        for b in self.blocks:
            k += b.dim
            out.append(k)
        return out

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        off = self.offsets
        vals = [blk(x[..., off[i]:off[i + 1]]) for i, blk in enumerate(self.blocks)]
        return np.max(np.stack(vals, axis=-1), axis=-1)


NormSpec = Union[MaxNorm, PNorm, DirectSum]


def is_polyhedral(norm: NormSpec) -> bool:
    """True when every leaf of ``norm`` is a max-norm."""
    if isinstance(norm, MaxNorm):
        return True
    if isinstance(norm, DirectSum):
        return all(is_polyhedral(b) for b in norm.blocks)
    return False


def is_uniformly_convex(norm: NormSpec) -> bool:
    """True when every leaf is a p-norm (so each block is uniformly convex)."""
    if isinstance(norm, PNorm):
        return True
    if isinstance(norm, DirectSum):
        return all(is_uniformly_convex(b) for b in norm.blocks)
    return False


def leaves(norm: NormSpec) -> list:
    """Leaf norms with their coordinate offsets, as ``(start, leaf)`` pairs."""
    if not isinstance(norm, DirectSum):
        return [(0, norm)]
    out = []
    for off, blk in zip(norm.offsets, norm.blocks):
        out.extend((off + s, leaf) for s, leaf in leaves(blk))
    return out


def restrict(norm: NormSpec, start: int, stop: int) -> NormSpec:
    """The restriction of ``norm`` to the coordinate slice ``[start, stop)``.

    Max- and p-norms restrict to the same kind on fewer coordinates; a direct
    sum restricts when the slice is a union of whole blocks.
    """
    k = stop - start
    if start == 0 and stop == norm.dim:
        return norm
    if isinstance(norm, MaxNorm):
        return MaxNorm(k)
    if isinstance(norm, PNorm):
        return PNorm(norm.p, k)
    off = norm.offsets
    for i, blk in enumerate(norm.blocks):
        if off[i] <= start and stop <= off[i + 1]:
            return restrict(blk, start - off[i], stop - off[i])
    if start in off and stop in off:
        i, j = off.index(start), off.index(stop)
        return DirectSum(norm.blocks[i:j])
    raise InstanceError(f"slice [{start}, {stop}) does not align with the blocks of {norm}")


def equivalence_constant(norm: NormSpec) -> float:
    """Smallest c with ||x|| <= c * ||x||_inf: 1 for max, dim**(1/p) for p-norms."""
    if isinstance(norm, MaxNorm):
        return 1.0
    if isinstance(norm, PNorm):
        return float(norm.dim) ** (1.0 / norm.p)
    return max(equivalence_constant(b) for b in norm.blocks)


class PointSet:
    """A non-empty finite set of points in R^dim, stored as an (m, dim) array.

    Near-duplicates (max-abs difference below ``dedup_tol``) are merged on
    construction, keeping the first occurrence.
    """

    __slots__ = ("points",)

    def __init__(self, points, dedup_tol: float = DEDUP_TOL):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise InstanceError("a point set must be a non-empty list of equal-length points")
        if not np.all(np.isfinite(pts)):
            raise InstanceError("point coordinates must be finite")
        keep = []
        for i in range(pts.shape[0]):
            if all(np.max(np.abs(pts[i] - pts[j])) > dedup_tol for j in keep):
                keep.append(i)
        arr = pts[keep].copy()
        arr.setflags(write=False)
        self.points = arr

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def __iter__(self):
        return iter(self.points)

    def __repr__(self):
        return f"PointSet({self.points.tolist()})"

    def scaled(self, factor: float) -> "PointSet":
        return PointSet(self.points * factor)

    def block(self, start: int, stop: int) -> "PointSet":
        return PointSet(self.points[:, start:stop])


PointLike = Union[PointSet, np.ndarray, Sequence]


def as_points(F: PointLike) -> np.ndarray:
    """Return the (m, dim) coordinate array behind a point set or array-like."""
    if isinstance(F, PointSet):
        return F.points
    arr = np.atleast_2d(np.asarray(F, dtype=float))
    if arr.shape[0] == 0:
        raise InstanceError("empty point set")
    return arr


def _check_dim(norm: NormSpec, *arrays):
    for a in arrays:
        if np.shape(a)[-1] != norm.dim:
            raise InstanceError(
                f"dimension mismatch: norm has dim {norm.dim}, point has dim {np.shape(a)[-1]}")


def distance(norm: NormSpec, x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_dim(norm, x, y)
    return float(norm(x - y))


def farthest_radius(norm: NormSpec, v, F: PointLike) -> float:
    """r(v, F): the largest distance from ``v`` to a point of ``F``."""
    pts = as_points(F)
    v = np.asarray(v, dtype=float)
    _check_dim(norm, v, pts)
    return float(np.max(norm(pts - v)))


def farthest_radius_many(norm: NormSpec, V: np.ndarray, F: PointLike) -> np.ndarray:
    """Vectorised r(v, F) for each row ``v`` of ``V``."""
    pts = as_points(F)
    V = np.atleast_2d(np.asarray(V, dtype=float))
    out = np.full(V.shape[0], -np.inf)
    for b in pts:
        np.maximum(out, norm(V - b), out=out)
    return out


def distance_matrix(norm: NormSpec, A: PointLike, B: PointLike) -> np.ndarray:
    a, b = as_points(A), as_points(B)
    _check_dim(norm, a, b)
    return norm(a[:, None, :] - b[None, :, :])


def deviation(norm: NormSpec, A: PointLike, B: PointLike) -> float:
    """One-sided deviation sup_{a in A} d(a, B)."""
    return float(np.max(np.min(distance_matrix(norm, A, B), axis=1)))


def hausdorff_finite(norm: NormSpec, A: PointLike, B: PointLike) -> float:
    D = distance_matrix(norm, A, B)
    return float(max(np.max(np.min(D, axis=1)), np.max(np.min(D, axis=0))))


def diameter(norm: NormSpec, F: PointLike) -> float:
    return float(np.max(distance_matrix(norm, F, F)))


def convexity_modulus(p: float, eps: float) -> float:
    """A valid modulus delta'(eps) in (0, eps/2] for the l_p norm.

    For p >= 2 this is Clarkson's exact modulus 1 - (1 - (eps/2)^p)^(1/p);
    for 1 < p < 2 the conservative bound (p - 1) eps^2 / 8 is used.  Both
    satisfy: ||x|| = ||y|| = 1 and ||x - y|| >= eps imply
    ||(x + y)/2|| <= 1 - delta.
    """
    if not (1.0 < p < np.inf):
        raise InstanceError(f"p must lie strictly between 1 and inf, got {p}")
    if not (0.0 < eps <= 2.0):
        raise InstanceError(f"eps must lie in (0, 2], got {eps}")
    if p >= 2:
        # 1 - (1 - u)^(1/p) computed without cancellation for small u
        u = (eps / 2.0) ** p
        dp = -np.expm1(np.log1p(-u) / p) if u < 1 else 1.0
    else:
        dp = (p - 1.0) * eps * eps / 8.0
    return float(min(eps / 2.0, dp))


def norm_modulus(norm: NormSpec, eps: float) -> float:
    """Modulus for a direct sum of p-norm blocks: the worst block modulus."""
    return min(convexity_modulus(leaf.p, eps) for _, leaf in leaves(norm))
