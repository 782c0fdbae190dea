"""Brute-force grid oracle for radii, center sets and S-values at dim <= 3.

Nothing here calls the solvers.  The grid is anchored at integer multiples
of h in the coordinates of the affine hull of V (the ambient coordinates
unless V carries equalities), restricted to a box that provably contains
every restricted center:

    |c_i - b_i| <= ||c - b|| <= rad <= r(v0, F)   for any feasible v0,

so cent lies in prod_i [max_b b_i - r0, min_b b_i + r0] with r0 = r(v0, F).

Error model: r(., F) is 1-Lipschitz for the norm, the norm is at most
c(n) times the max-norm, and a grid step of h in the parameter moves the
ambient point by at most h * ||N||_inf.  Whenever a feasible grid point
lies within one step of a center, |rad_hat - rad| <= h * c with
c = c(n) * max(1, ||N||_inf).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import lp
from .domain import (AffineSubspace, BlockProduct, Polytope, SubspaceBall, WholeSpace,
                     _affine_param)
from .errors import CapabilityError, InstanceError
from .norms import (MaxNorm, NormSpec, PNorm, as_points, equivalence_constant,
                    farthest_radius_many)

MAX_DIM = 3
MAX_POINTS = 100_000_000
CHUNK = 200_000


def _hull(V):
    """(x0, N) with V inside x0 + span(N); N has orthonormal columns."""
    if isinstance(V, AffineSubspace):
        return _affine_param(V.A, V.c, 1e-9)
    if isinstance(V, Polytope) and V.A.shape[0]:
        param = _affine_param(V.A, V.b, 1e-9)
        if param is None:
            raise InstanceError("polytope equalities are inconsistent")
        return param
    if isinstance(V, SubspaceBall):
        comp = V.complement()
        if comp.shape[0]:
            return _affine_param(comp, np.zeros(comp.shape[0]), 1e-9)
        return np.zeros(V.dim), np.eye(V.dim)
    if isinstance(V, BlockProduct):
        hulls = [_hull(p) for p in V.parts]
        x0 = np.concatenate([h[0] for h in hulls])
        N = np.zeros((V.dim, sum(h[1].shape[1] for h in hulls)))
        r = c = 0
        for _, n_ in hulls:
            N[r:r + n_.shape[0], c:c + n_.shape[1]] = n_
            r += n_.shape[0]
            c += n_.shape[1]
        return x0, N
    return np.zeros(V.dim), np.eye(V.dim)


def _feasible_mask(V, X: np.ndarray, tol: float) -> np.ndarray:
    """Vectorised membership for points already on the affine hull of V."""
    if isinstance(V, (WholeSpace, AffineSubspace)):
        return np.ones(X.shape[0], dtype=bool)
    if isinstance(V, Polytope):
        if V._empty:
            return np.zeros(X.shape[0], dtype=bool)
        if V.G.shape[0] == 0:
            return np.ones(X.shape[0], dtype=bool)
        return np.all(X @ V.G.T <= V.h + tol * (1 + np.abs(V.h)), axis=1)
    if isinstance(V, SubspaceBall):
        return V.norm(X) <= V.lam + tol
    if isinstance(V, BlockProduct):
        off = V.offsets
        mask = np.ones(X.shape[0], dtype=bool)
        for i, p in enumerate(V.parts):
            mask &= _feasible_mask(p, X[:, off[i]:off[i + 1]], tol)
        return mask
    raise InstanceError(f"unsupported constraint set {type(V).__name__}")


def _feasible_point(V, target: np.ndarray) -> np.ndarray:
    """Some point of V, preferably near ``target`` in the max-norm."""
    if isinstance(V, WholeSpace):
        return target
    if isinstance(V, SubspaceBall):
        return np.zeros(V.dim)
    if isinstance(V, BlockProduct):
        off = V.offsets
        return np.concatenate([_feasible_point(p, target[off[i]:off[i + 1]])
                               for i, p in enumerate(V.parts)])
    if isinstance(V, AffineSubspace):
        x0, N = _hull(V)
        return x0 + N @ (N.T @ (target - x0))
    # polytope: minimise ||x - target||_inf over P
    d = V.dim
    I, one = np.eye(d), np.ones((d, 1))
    A_ub = np.vstack([np.hstack([I, -one]), np.hstack([-I, -one]),
                      np.hstack([V.G, np.zeros((V.G.shape[0], 1))])])
    b_ub = np.concatenate([target, -target, V.h])
    A_eq = np.hstack([V.A, np.zeros((V.A.shape[0], 1))])
    c = np.zeros(d + 1)
    c[-1] = 1
    res = lp.linprog(c, A_ub, b_ub, A_eq, V.b)
    if not res.ok:
        raise InstanceError("constraint set is empty")
    return res.x[:d]


@dataclass
class GridResult:
    rad_hat: float
    centers: np.ndarray  # grid points with r <= rad_hat + h c
    h: float
    c: float  # error constant: |rad_hat - rad| <= h c
    evaluated: int
    lo: np.ndarray  # scan box in ambient coordinates
    hi: np.ndarray
    # feasible grid points with r <= rad_hat + keep, with their radii
    near: np.ndarray | None = None
    near_r: np.ndarray | None = None


class _Grid:
    def __init__(self, norm: NormSpec, V, F, h: float, tol: float = 1e-12):
        if norm.dim > MAX_DIM:
            raise CapabilityError(f"grid oracle is limited to dim <= {MAX_DIM}")
        if h <= 0:
            raise InstanceError("grid step must be positive")
        self.norm, self.V, self.F, self.h, self.tol = norm, V, as_points(F), h, tol
        self.x0, self.N = _hull(V)
        self.c = equivalence_constant(norm) * max(1.0, float(np.max(np.sum(np.abs(self.N),
                                                                            axis=1))))

    def box(self, r0: float):
        lo = self.F.max(axis=0) - r0
        hi = self.F.min(axis=0) + r0
        return lo, hi

    def axes(self, lo, hi, h):
        if self.N.shape[1] == 0:
            return []
        a, b = lo - self.x0, hi - self.x0
        ylo = np.sum(np.minimum(self.N * a[:, None], self.N * b[:, None]), axis=0)
        yhi = np.sum(np.maximum(self.N * a[:, None], self.N * b[:, None]), axis=0)
        return [np.arange(np.floor(l / h) - 1, np.ceil(u / h) + 2) * h
                for l, u in zip(ylo, yhi)]

    def scan(self, lo, hi, h, keep: float | None):
        """Minimum radius over the grid; with ``keep`` also every point within it."""
        axes = self.axes(lo, hi, h)
        shape = tuple(len(a) for a in axes)
        total = int(np.prod(shape)) if shape else 1
        if total > MAX_POINTS:
            raise CapabilityError(f"grid would have {total} points (cap {MAX_POINTS})")
        best, best_x = np.inf, None
        kept_x, kept_r = [], []
        pad = 1e-9 * h
        for start in range(0, total, CHUNK):
            idx = np.arange(start, min(total, start + CHUNK))
            if shape:
                sub = np.unravel_index(idx, shape)
                Y = np.stack([axes[k][sub[k]] for k in range(len(axes))], axis=1)
                X = self.x0 + Y @ self.N.T
            else:
                X = self.x0[None, :]
            inbox = np.all((X >= lo - pad) & (X <= hi + pad), axis=1)
            X = X[inbox & _feasible_mask(self.V, X, self.tol)]
            if X.shape[0] == 0:
                continue
            r = farthest_radius_many(self.norm, X, self.F)
            i = int(np.argmin(r))
            if r[i] < best:
                best, best_x = float(r[i]), X[i]
            if keep is not None:
                sel = r <= best + keep
                kept_x.append(X[sel])
                kept_r.append(r[sel])
        if best_x is None:
            raise InstanceError("no feasible grid point inside the scan box; refine h")
        if keep is None:
            return best, best_x, total, None, None
        KX, KR = np.vstack(kept_x), np.concatenate(kept_r)
        sel = KR <= best + keep
        return best, best_x, total, KX[sel], KR[sel]


def grid_radius_center(norm: NormSpec, V, F, h: float, keep: float = 0.0) -> GridResult:
    """Grid estimate of rad_V(F) and center samples; ``keep`` additionally
    retains points with r <= rad_hat + keep for S-value queries."""
    g = _Grid(norm, V, F, h)
    pts = g.F
    mid = 0.5 * (pts.min(axis=0) + pts.max(axis=0))
    v0 = _feasible_point(V, mid)
    r0 = float(np.max(norm(pts - v0)))
    lo, hi = g.box(r0)
    # a coarse pass only tightens the box; the answer comes from the fine pass
    coarse = max(h, float(np.max(hi - lo)) / 48)
    if coarse > 4 * h:
        try:
            best, _, _, _, _ = g.scan(lo, hi, coarse, None)
            if best < r0:
                lo, hi = g.box(best)
        except InstanceError:
            pass
    margin = max(keep, 0.0) + h * g.c
    lo_s, hi_s = lo - margin, hi + margin
    best, _, total, KX, KR = g.scan(lo_s, hi_s, h, margin)
    centers = KX[KR <= best + h * g.c]
    return GridResult(best, centers, h, g.c, total, lo_s, hi_s, KX, KR)


def _nn_distance(norm: NormSpec, Q: np.ndarray, C: np.ndarray) -> np.ndarray:
    """min over c in C of ||q - c|| for every q in Q."""
    if isinstance(norm, MaxNorm):
        return cKDTree(C).query(Q, p=np.inf)[0]
    if isinstance(norm, PNorm):
        return cKDTree(C).query(Q, p=norm.p)[0]
    out = np.empty(Q.shape[0])
    for s in range(0, Q.shape[0], 512):
        block = Q[s:s + 512]
        out[s:s + 512] = np.min(norm(block[:, None, :] - C[None, :, :]), axis=1)
    return out


def grid_s_value(norm: NormSpec, V, F, delta, h: float):
    """Grid estimate of S(F, delta) for one delta or a sequence of them.

    Documented error bound: 2 h c.
    """
    deltas = np.atleast_1d(np.asarray(delta, dtype=float))
    if np.any(deltas < 0):
        raise InstanceError("delta must be non-negative")
    res = grid_radius_center(norm, V, F, h, keep=float(deltas.max()))
    d = _nn_distance(norm, res.near, res.centers)
    vals = np.array([float(np.max(d[res.near_r <= res.rad_hat + dl], initial=0.0))
                     for dl in deltas])
    return (float(vals[0]) if np.ndim(delta) == 0 else vals), res


__all__ = ["GridResult", "grid_radius_center", "grid_s_value"]
