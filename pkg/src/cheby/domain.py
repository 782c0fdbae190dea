"""Constraint sets V, polytopes, and the polyhedral geometry on top of them.

Constraint kinds: whole space, affine subspace {Ax = c}, H-polytope
{Gx <= h, Ax = b}, the scaled unit ball lam * B_Y of a subspace Y under an
ambient norm, and block products aligned with a direct sum.  Everything
that must be exact (center sets, enlargement sets, Hausdorff distances
between them) goes through :class:`Polytope`.
"""
from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np

from . import lp
from .errors import CapabilityError, InstanceError, SolverError
from .norms import DEFAULT_TOL, NormSpec, PNorm, as_points, is_polyhedral

MAX_VERTEX_DIM = 8
_COMBO_LIMIT = 400_000


def null_space(M: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Orthonormal basis (as columns) of the null space of ``M``."""
    M = np.atleast_2d(M)
    n = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(M)
    rank = int(np.sum(s > rtol * max(1.0, s[0] if s.size else 0.0)))
    return vt[rank:].T.copy()


def _affine_param(A: np.ndarray, b: np.ndarray, tol: float):
    """x0, N with {x : Ax = b} = {x0 + N y}; None when inconsistent."""
    n = A.shape[1]
    if A.shape[0] == 0:
        return np.zeros(n), np.eye(n)
    x0, *_ = np.linalg.lstsq(A, b, rcond=None)
    if np.max(np.abs(A @ x0 - b), initial=0.0) > tol * max(1.0, np.max(np.abs(b), initial=0.0)):
        return None
    return x0, null_space(A)


class WholeSpace:
    def __init__(self, dim: int):
        if int(dim) < 1:
            raise InstanceError("dimension must be positive")
        self.dim = int(dim)

    def __repr__(self):
        return f"WholeSpace({self.dim})"


class AffineSubspace:
    """Solution set of ``A x = c``; rejected at construction when inconsistent."""

    def __init__(self, A, c, tol: float = DEFAULT_TOL):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.c = np.asarray(c, dtype=float).ravel()
        if self.A.shape[0] != self.c.size:
            raise InstanceError("affine subspace: A and c have inconsistent row counts")
        self.dim = self.A.shape[1]
        if _affine_param(self.A, self.c, tol) is None:
            raise InstanceError("affine subspace is empty (inconsistent equations)")

    def __repr__(self):
        return f"AffineSubspace(A={self.A.tolist()}, c={self.c.tolist()})"


class SubspaceBall:
    """lam * B_Y where Y = span(rows of ``basis``) and the ball is taken in ``norm``."""

    def __init__(self, basis, lam: float, norm: NormSpec):
        B = np.asarray(basis, dtype=float)
        if B.size == 0:
            B = np.zeros((0, norm.dim))
        self.basis = np.atleast_2d(B)
        if self.basis.shape[1] != norm.dim:
            raise InstanceError("subspace basis vectors must match the norm dimension")
        if not lam > 0:
            raise InstanceError(f"lambda must be positive, got {lam}")
        self.lam = float(lam)
        self.norm = norm
        self.dim = norm.dim

    def complement(self) -> np.ndarray:
        """Rows spanning Y-perp, so Y = {x : complement() @ x = 0}."""
        if self.basis.shape[0] == 0:
            return np.eye(self.dim)
        return null_space(self.basis).T

    def scaled(self, lam: float) -> "SubspaceBall":
        return SubspaceBall(self.basis, lam, self.norm)

    def __repr__(self):
        return f"SubspaceBall(basis={self.basis.tolist()}, lam={self.lam}, norm={self.norm})"


class BlockProduct:
    def __init__(self, parts):
        self.parts = tuple(parts)
        if not self.parts:
            raise InstanceError("block product needs at least one part")
        self.dim = sum(p.dim for p in self.parts)

    @property
    def offsets(self):
        out, k = [0], 0
        for p in self.parts:
            k += p.dim
            out.append(k)
        return out

    def __repr__(self):
        return f"BlockProduct({list(self.parts)})"


class Polytope:
    """{x : G x <= h, A x = b}, possibly explicitly empty.

    Vertices are enumerated lazily and cached; enumeration requires the set
    to be bounded and ``dim <= 8``.
    """

    def __init__(self, G=None, h=None, A=None, b=None, dim=None, *, empty=False,
                 bounded=None):
        if dim is None:
            for M in (G, A):
                if M is not None and np.size(M):
                    dim = np.atleast_2d(M).shape[1]
                    break
        if dim is None:
            raise InstanceError("cannot infer polytope dimension")
        self.dim = int(dim)
        self.G = np.zeros((0, dim)) if G is None or np.size(G) == 0 else np.atleast_2d(np.asarray(G, float))
        self.h = np.zeros(0) if h is None or np.size(h) == 0 else np.asarray(h, float).ravel()
        self.A = np.zeros((0, dim)) if A is None or np.size(A) == 0 else np.atleast_2d(np.asarray(A, float))
        self.b = np.zeros(0) if b is None or np.size(b) == 0 else np.asarray(b, float).ravel()
        if self.G.shape[0] != self.h.size or self.A.shape[0] != self.b.size:
            raise InstanceError("polytope rows and right-hand sides disagree")
        if self.G.shape[1] != self.dim or self.A.shape[1] != self.dim:
            raise InstanceError("polytope matrices do not match its dimension")
        self._empty = True if empty else None
        self._bounded = bounded
        self._vertices = None

    @classmethod
    def empty(cls, dim: int) -> "Polytope":
        return cls(dim=dim, empty=True, bounded=True)

    @classmethod
    def box(cls, lo, hi) -> "Polytope":
        lo, hi = np.asarray(lo, float), np.asarray(hi, float)
        d = lo.size
        return cls(np.vstack([np.eye(d), -np.eye(d)]), np.concatenate([hi, -lo]), bounded=True)

    @classmethod
    def point(cls, x) -> "Polytope":
        x = np.asarray(x, float)
        return cls(A=np.eye(x.size), b=x, bounded=True)

    def __repr__(self):
        if self._empty:
            return f"Polytope.empty({self.dim})"
        return f"Polytope(dim={self.dim}, ineq={self.G.shape[0]}, eq={self.A.shape[0]})"

    # -- queries -------------------------------------------------------------
    def is_empty(self, tol: float = DEFAULT_TOL) -> bool:
        if self._empty is None:
            res = lp.linprog(np.zeros(self.dim), self.G, self.h, self.A, self.b)
            self._empty = res.status == "infeasible"
        return self._empty

    def contains(self, x, tol: float = DEFAULT_TOL) -> bool:
        if self._empty:
            return False
        x = np.asarray(x, float)
        ok = True
        if self.G.shape[0]:
            ok = ok and bool(np.all(self.G @ x <= self.h + tol * (1 + np.abs(self.h))))
        if self.A.shape[0]:
            ok = ok and bool(np.all(np.abs(self.A @ x - self.b) <= tol * (1 + np.abs(self.b))))
        return ok

    def is_bounded(self) -> bool:
        if self._bounded is None:
            self._bounded = _check_bounded(self)
        return self._bounded

    def is_box(self) -> bool:
        """True when every inequality row is axis-aligned and there are no equalities."""
        if self.A.shape[0]:
            return False
        return bool(np.all(np.count_nonzero(self.G, axis=1) == 1))

    def box_bounds(self):
        lo = np.full(self.dim, -np.inf)
        hi = np.full(self.dim, np.inf)
        for g, h in zip(self.G, self.h):
            j = int(np.flatnonzero(g)[0])
            if g[j] > 0:
                hi[j] = min(hi[j], h / g[j])
            else:
                lo[j] = max(lo[j], h / g[j])
        return lo, hi

    def vertices(self, tol: float = DEFAULT_TOL) -> np.ndarray:
        if self._vertices is None:
            self._vertices = _enumerate_vertices(self, tol)
            self._vertices.setflags(write=False)
        return self._vertices

    # -- constructions -------------------------------------------------------
    def intersect(self, other: "Polytope") -> "Polytope":
        if self._empty or other._empty:
            return Polytope.empty(self.dim)
        bounded = True if (self._bounded or other._bounded) else None
        return Polytope(np.vstack([self.G, other.G]), np.concatenate([self.h, other.h]),
                        np.vstack([self.A, other.A]), np.concatenate([self.b, other.b]),
                        dim=self.dim, bounded=bounded)

    def product(self, other: "Polytope") -> "Polytope":
        d1, d2 = self.dim, other.dim
        if self._empty or other._empty:
            return Polytope.empty(d1 + d2)

        def blockdiag(M1, M2):
            out = np.zeros((M1.shape[0] + M2.shape[0], d1 + d2))
            out[:M1.shape[0], :d1] = M1
            out[M1.shape[0]:, d1:] = M2
            return out

        P = Polytope(blockdiag(self.G, other.G), np.concatenate([self.h, other.h]),
                     blockdiag(self.A, other.A), np.concatenate([self.b, other.b]),
                     dim=d1 + d2)
        if self._bounded is not None and other._bounded is not None:
            P._bounded = self._bounded and other._bounded
        if self._vertices is not None and other._vertices is not None:
            P._vertices = product_points(self._vertices, other._vertices)
            P._vertices.setflags(write=False)
        return P

    def scaled(self, lam: float) -> "Polytope":
        """The image under x -> lam * x (lam > 0)."""
        if self._empty:
            return Polytope.empty(self.dim)
        return Polytope(self.G, self.h * lam, self.A, self.b * lam, dim=self.dim,
                        bounded=self._bounded)


def product_points(P1: np.ndarray, P2: np.ndarray) -> np.ndarray:
    if P1.shape[0] == 0 or P2.shape[0] == 0:
        return np.zeros((0, P1.shape[1] + P2.shape[1]))
    i, j = np.meshgrid(np.arange(P1.shape[0]), np.arange(P2.shape[0]), indexing="ij")
    return np.hstack([P1[i.ravel()], P2[j.ravel()]])


def HPolytope(G, h, tol: float = DEFAULT_TOL) -> Polytope:
    """An H-polytope constraint set; raises when the system is infeasible."""
    P = Polytope(G, h)
    if P.is_empty(tol):
        raise InstanceError("H-polytope constraint set is empty")
    return P


# -- vertex enumeration ------------------------------------------------------

def _check_bounded(P: Polytope) -> bool:
    """Bounded iff the reduced rows have full rank and a strictly positive
    combination summing to zero (Stiemke)."""
    param = _affine_param(P.A, P.b, 1e-9)
    if param is None:
        return True
    _, N = param
    k = N.shape[1]
    if k == 0:
        return True
    G = P.G @ N
    if G.shape[0] == 0 or np.linalg.matrix_rank(G) < k:
        return False
    m = G.shape[0]
    res = lp.linprog(np.zeros(m), -np.eye(m), -np.ones(m), G.T, np.zeros(k))
    return res.status == "optimal"


def dedupe(points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    if points.shape[0] == 0:
        return points
    order = np.lexsort(points.T[::-1])
    kept: list[np.ndarray] = []
    for p in points[order]:
        if not kept or np.min(np.max(np.abs(np.asarray(kept) - p), axis=1)) > tol:
            kept.append(p)
    return np.asarray(kept)


def _prune_redundant(G, h, tol):
    keep = np.ones(G.shape[0], dtype=bool)
    for i in range(G.shape[0]):
        keep[i] = False
        res = lp.linprog(-G[i], G[keep], h[keep])
        if res.status == "unbounded" or (res.ok and -res.fun > h[i] + tol):
            keep[i] = True
    return G[keep], h[keep]


def _enumerate_vertices(P: Polytope, tol: float) -> np.ndarray:
    if P.dim > MAX_VERTEX_DIM:
        raise CapabilityError(f"vertex enumeration is limited to dim <= {MAX_VERTEX_DIM}")
    if P._empty:
        return np.zeros((0, P.dim))
    if not P.is_bounded():
        raise InstanceError("vertex enumeration requires a bounded polytope")
    param = _affine_param(P.A, P.b, 1e-9)
    if param is None:
        return np.zeros((0, P.dim))
    x0, N = param
    k = N.shape[1]
    G = P.G @ N
    h = P.h - P.G @ x0
    if k == 0:
        ok = np.all(G.shape[0] == 0 or h >= -tol * (1 + np.abs(P.h)))
        return x0[None, :] if ok else np.zeros((0, P.dim))

    norms = np.linalg.norm(G, axis=1)
    zero = norms < 1e-13
    if np.any(h[zero] < -tol):
        return np.zeros((0, P.dim))
    G, h = G[~zero] / norms[~zero, None], h[~zero] / norms[~zero]
    # identical normalised rows: keep the tightest
    if G.shape[0]:
        key = np.round(G, 12)
        uniq, inv = np.unique(key, axis=0, return_inverse=True)
        inv = np.asarray(inv).ravel()
        hh = np.full(uniq.shape[0], np.inf)
        np.minimum.at(hh, inv, h)
        G, h = uniq, hh
    m = G.shape[0]
    if m < k:
        return np.zeros((0, P.dim))
    if comb(m, k) > _COMBO_LIMIT:
        G, h = _prune_redundant(G, h, tol)
        m = G.shape[0]
        if comb(m, k) > _COMBO_LIMIT:
            raise CapabilityError("too many constraint subsets for exhaustive enumeration")

    idx = np.array(list(combinations(range(m), k)), dtype=int)
    M = G[idx]
    s = np.linalg.svd(M, compute_uv=False)
    good = s[:, -1] > 1e-10 * np.maximum(s[:, 0], 1e-300)
    if not np.any(good):
        return np.zeros((0, P.dim))
    Y = np.linalg.solve(M[good], h[idx[good]][..., None])[..., 0]
    feas = np.all(Y @ G.T <= h + tol, axis=1)
    Y = Y[feas]
    X = x0 + Y @ N.T
    return dedupe(X, tol)


# -- set conversions -----------------------------------------------------------

def to_polytope(V, norm: NormSpec | None = None) -> Polytope:
    """Polyhedral description of ``V``; raises for non-polyhedral sets."""
    if isinstance(V, Polytope):
        return V
    if isinstance(V, WholeSpace):
        return Polytope(dim=V.dim, bounded=False)
    if isinstance(V, AffineSubspace):
        return Polytope(A=V.A, b=V.c, dim=V.dim)
    if isinstance(V, SubspaceBall):
        if not is_polyhedral(V.norm):
            raise InstanceError("a subspace ball is polyhedral only under a max-family norm")
        d = V.dim
        box = Polytope.box(-V.lam * np.ones(d), V.lam * np.ones(d))
        comp = V.complement()
        P = Polytope(box.G, box.h, comp, np.zeros(comp.shape[0]), dim=d, bounded=True)
        return P
    if isinstance(V, BlockProduct):
        P = None
        for part in V.parts:
            Q = to_polytope(part)
            P = Q if P is None else P.product(Q)
        return P
    raise InstanceError(f"{type(V).__name__} has no polyhedral description")


def is_polyhedral_set(V) -> bool:
    if isinstance(V, (Polytope, WholeSpace, AffineSubspace)):
        return True
    if isinstance(V, SubspaceBall):
        return is_polyhedral(V.norm)
    if isinstance(V, BlockProduct):
        return all(is_polyhedral_set(p) for p in V.parts)
    return False


def block_parts(V, norm: NormSpec, split: int):
    """Split a 2-block set at coordinate ``split`` into (V1, V2)."""
    if isinstance(V, BlockProduct):
        off = V.offsets
        if split not in off:
            raise InstanceError("block product does not align with the direct-sum split")
        i = off.index(split)
        left = V.parts[:i]
        right = V.parts[i:]
        V1 = left[0] if len(left) == 1 else BlockProduct(left)
        V2 = right[0] if len(right) == 1 else BlockProduct(right)
        return V1, V2
    if isinstance(V, WholeSpace):
        return WholeSpace(split), WholeSpace(V.dim - split)
    raise InstanceError("direct-sum instances need V to be a block product")


def scale_set(V, lam: float):
    """The image of ``V`` under x -> lam * x."""
    if isinstance(V, WholeSpace):
        return V
    if isinstance(V, AffineSubspace):
        return AffineSubspace(V.A, V.c * lam)
    if isinstance(V, Polytope):
        return V.scaled(lam)
    if isinstance(V, SubspaceBall):
        return V.scaled(V.lam * lam)
    if isinstance(V, BlockProduct):
        return BlockProduct([scale_set(p, lam) for p in V.parts])
    raise InstanceError(f"cannot scale {type(V).__name__}")


def contains(V, x, tol: float = DEFAULT_TOL) -> bool:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != V.dim:
        raise InstanceError(f"dimension mismatch: set has dim {V.dim}, point has {x.shape[-1]}")
    if isinstance(V, WholeSpace):
        return True
    if isinstance(V, AffineSubspace):
        return bool(np.all(np.abs(V.A @ x - V.c) <= tol * (1 + np.abs(V.c))))
    if isinstance(V, Polytope):
        return V.contains(x, tol)
    if isinstance(V, SubspaceBall):
        comp = V.complement()
        in_span = comp.shape[0] == 0 or np.max(np.abs(comp @ x)) <= tol * (1 + np.max(np.abs(x)))
        return bool(in_span and V.norm(x) <= V.lam + tol)
    if isinstance(V, BlockProduct):
        off = V.offsets
        return all(contains(p, x[off[i]:off[i + 1]], tol) for i, p in enumerate(V.parts))
    raise InstanceError(f"unsupported constraint set {type(V).__name__}")


# -- distances -----------------------------------------------------------------

def _box_distance(x, lo, hi):
    gap = np.maximum(np.maximum(lo - x, x - hi), 0.0)
    return float(np.max(gap))


def _lp_distance(x: np.ndarray, P: Polytope) -> float:
    """max-norm distance from ``x`` to ``P`` via min t s.t. |x - v|_i <= t."""
    d = P.dim
    I = np.eye(d)
    one = np.ones((d, 1))
    A_ub = np.vstack([np.hstack([-I, -one]), np.hstack([I, -one]),
                      np.hstack([P.G, np.zeros((P.G.shape[0], 1))])])
    b_ub = np.concatenate([-x, x, P.h])
    A_eq = np.hstack([P.A, np.zeros((P.A.shape[0], 1))])
    c = np.zeros(d + 1)
    c[-1] = 1.0
    res = lp.linprog(c, A_ub, b_ub, A_eq, P.b)
    if not res.ok:
        raise SolverError(f"distance LP ended with status {res.status}")
    return max(0.0, res.fun)


def distance_to_set(norm: NormSpec, x, V, tol: float = DEFAULT_TOL) -> float:
    """d(x, V) = inf over v in V of ||x - v||.

    Exact LP for max-family norms over polyhedral sets, conic solve otherwise.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != norm.dim or V.dim != norm.dim:
        raise InstanceError("dimension mismatch between point, set and norm")
    if isinstance(V, WholeSpace):
        return 0.0
    if is_polyhedral(norm) and is_polyhedral_set(V):
        P = to_polytope(V)
        if P._empty:
            raise SolverError("distance to an empty set")
        if P.is_box():
            lo, hi = P.box_bounds()
            return _box_distance(x, lo, hi)
        return _lp_distance(x, P)
    if isinstance(V, Polytope) and V._empty:
        raise SolverError("distance to an empty set")
    if isinstance(V, AffineSubspace) and isinstance(norm, PNorm) and norm.p == 2:
        x0, N = _affine_param(V.A, V.c, 1e-9)
        y = N.T @ (x - x0)
        return float(norm(x - x0 - N @ y))
    from . import conic
    return conic.distance(norm, x, V)[0]


def max_distance_over(norm: NormSpec, P: Polytope, Q: Polytope, tol: float = DEFAULT_TOL):
    """sup over P of d(., Q), attained at a vertex of P since d(., Q) is convex.

    Returns ``(value, witness_vertex)``.
    """
    VP = P.vertices(tol)
    if VP.shape[0] == 0:
        return 0.0, None
    if Q.is_box():
        lo, hi = Q.box_bounds()
        gaps = np.maximum(np.maximum(lo - VP, VP - hi), 0.0)
        dists = norm(gaps)
    elif Q.G.shape[0] == 0 and Q.A.shape[0] == Q.dim:
        # Q is a single point
        pt = np.linalg.solve(Q.A, Q.b)
        dists = norm(VP - pt)
    else:
        dists = np.array([distance_to_set(norm, v, Q, tol) for v in VP])
    i = int(np.argmax(dists))
    return float(dists[i]), VP[i]


def polytope_hausdorff(norm: NormSpec, P: Polytope, Q: Polytope, tol: float = DEFAULT_TOL):
    """Exact d_H(P, Q) for bounded non-empty polytopes under a max-family norm.

    Returns ``(d_H, sup_P d(., Q), sup_Q d(., P))``.
    """
    if P.is_empty(tol) or Q.is_empty(tol):
        raise InstanceError("Hausdorff distance needs non-empty sets")
    a, _ = max_distance_over(norm, P, Q, tol)
    b, _ = max_distance_over(norm, Q, P, tol)
    return max(a, b), a, b


def vertex_set_distance(norm: NormSpec, P: Polytope, Q: Polytope, tol: float = DEFAULT_TOL) -> float:
    """Hausdorff distance between the vertex lists of two bounded polytopes."""
    A, B = P.vertices(tol), Q.vertices(tol)
    if A.shape[0] == 0 or B.shape[0] == 0:
        return 0.0 if A.shape[0] == B.shape[0] else float("inf")
    D = norm(A[:, None, :] - B[None, :, :])
    return float(max(D.min(axis=0).max(), D.min(axis=1).max()))


def ball_intersection(norm: NormSpec, F, alpha: float, V, tol: float = DEFAULT_TOL) -> Polytope:
    """{v in V : ||v - z|| <= alpha for all z in F} for a max-family norm.

    Under the max-norm the intersection of the balls is the box
    [max_z z_i - alpha, min_z z_i + alpha]; intervals that are inverted by at
    most ``tol`` are collapsed to their midpoint, larger inversions give an
    explicitly empty result.
    """
    if not is_polyhedral(norm):
        raise InstanceError("ball_intersection needs a max-family norm")
    pts = as_points(F)
    if pts.shape[1] != norm.dim or V.dim != norm.dim:
        raise InstanceError("dimension mismatch in ball_intersection")
    lo = pts.max(axis=0) - alpha
    hi = pts.min(axis=0) + alpha
    if np.any(lo > hi + tol * (1 + abs(alpha))):
        return Polytope.empty(norm.dim)
    flip = lo > hi
    mid = 0.5 * (lo + hi)
    lo = np.where(flip, mid, lo)
    hi = np.where(flip, mid, hi)
    box = Polytope.box(lo, hi)
    if isinstance(V, WholeSpace):
        return box
    P = box.intersect(to_polytope(V))
    P._bounded = True
    return P


__all__ = [
    "WholeSpace", "AffineSubspace", "SubspaceBall", "BlockProduct", "Polytope", "HPolytope",
    "contains", "distance_to_set", "ball_intersection", "polytope_hausdorff",
    "max_distance_over", "vertex_set_distance", "to_polytope", "is_polyhedral_set", "scale_set", "null_space",
    "dedupe", "product_points", "block_parts",
]
