"""Restricted Chebyshev radii, center sets and enlargement sets.

Two routes:

* max-family norms over polyhedral sets: an exact LP for the radius and the
  full optimal set as a polytope (``solve_polyhedral``);
* p-norm blocks: a conic solve for a single center (``solve_uniformly_convex``)
  and the truncated-step iteration on max-products of l_p blocks
  (``amir_iterate``), which builds a Cauchy sequence of near-centers whose
  step lengths halve.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import cvxpy as cp
import numpy as np

from . import conic, lp
from .domain import (AffineSubspace, BlockProduct, Polytope, SubspaceBall, WholeSpace,
                     _affine_param, ball_intersection, contains, is_polyhedral_set,
                     to_polytope)
from .errors import InstanceError, PreconditionError, SolverError
from .norms import (DEFAULT_TOL, DirectSum, NormSpec, PNorm, as_points, farthest_radius,
                    farthest_radius_many, is_polyhedral, norm_modulus)

log = logging.getLogger(__name__)

ITERATION_CAP = 10_000


@dataclass
class IterationStep:
    n: int
    step: float  # ||f_{n+1} - f_n|| in the normalised frame (radius 1)
    radius: float  # r(f_{n+1}, B) in the original scale
    delta_prime: float  # delta'(eps0 / 2^(n+1))
    truncated: int  # blocks where the step was shortened


@dataclass
class IterationTrace:
    eps0: float
    R: float
    seed_radius: float
    seed_delta_prime: float
    steps: list = field(default_factory=list)

    def violations(self, slack: float = 1e-9) -> list[str]:
        out = []
        if self.seed_radius > self.R * (1 + self.seed_delta_prime) + slack:
            out.append(f"seed radius {self.seed_radius} exceeds R(1+delta')")
        for s in self.steps:
            if s.step > 2 * self.eps0 / 2 ** s.n + slack:
                out.append(f"step {s.n}: ||f_(n+1)-f_n|| = {s.step} > 2 eps0/2^n")
            if s.radius > self.R * (1 + s.delta_prime) + slack:
                out.append(f"step {s.n}: radius {s.radius} > R(1+delta')")
        return out


@dataclass
class CenterSolution:
    radius: float
    status: str  # "exact" | "iterative" | "sampled"
    point: np.ndarray | None = None
    polytope: Polytope | None = None
    samples: np.ndarray | None = None
    tol: float = DEFAULT_TOL
    iterations: int = 0
    gap: float = 0.0
    converged: bool = True
    trace: IterationTrace | None = None

    @property
    def kind(self) -> str:
        if self.polytope is not None:
            return "polytope"
        if self.point is not None:
            return "point"
        return "sample"

    def representatives(self) -> np.ndarray:
        """Points standing for the center set: vertices, the point, or samples."""
        if self.polytope is not None:
            return self.polytope.vertices(self.tol)
        if self.point is not None:
            return self.point[None, :]
        return self.samples


def _check(norm: NormSpec, V, pts: np.ndarray):
    if pts.shape[1] != norm.dim or V.dim != norm.dim:
        raise InstanceError(
            f"dimension mismatch: norm {norm.dim}, set {V.dim}, points {pts.shape[1]}")


def polyhedral_radius(norm: NormSpec, V, F) -> tuple[float, np.ndarray]:
    """rad_V(F) and one optimal point, from

        min t  s.t.  v_i - t <= min_b b_i,  -v_i - t <= -max_b b_i,  v in V.

    The per-coordinate collapse is exact for the max-norm: max_b |v_i - b_i|
    only depends on the extreme values of the i-th coordinates.
    """
    pts = as_points(F)
    _check(norm, V, pts)
    P = to_polytope(V)
    d = norm.dim
    I = np.eye(d)
    one = np.ones((d, 1))
    A_ub = np.vstack([np.hstack([I, -one]), np.hstack([-I, -one]),
                      np.hstack([P.G, np.zeros((P.G.shape[0], 1))])])
    b_ub = np.concatenate([pts.min(axis=0), -pts.max(axis=0), P.h])
    A_eq = np.hstack([P.A, np.zeros((P.A.shape[0], 1))])
    c = np.zeros(d + 1)
    c[-1] = 1.0
    res = lp.linprog(c, A_ub, b_ub, A_eq, P.b)
    if res.status == "infeasible":
        raise InstanceError("constraint set is empty")
    if not res.ok:
        raise SolverError(f"radius LP ended with status {res.status}")
    return max(res.fun, 0.0), res.x[:d]


def solve_polyhedral(norm: NormSpec, V, F, tol: float = DEFAULT_TOL) -> CenterSolution:
    if not is_polyhedral(norm):
        raise InstanceError("solve_polyhedral needs a max-family norm")
    if not is_polyhedral_set(V):
        raise InstanceError("solve_polyhedral needs a polyhedral constraint set")
    rad, _ = polyhedral_radius(norm, V, F)
    cent = ball_intersection(norm, F, rad, V, tol)
    if cent.is_empty(tol):
        raise SolverError("optimal set came out empty; LP and box disagree")
    return CenterSolution(radius=rad, status="exact", polytope=cent, tol=tol)


def snap(V, x: np.ndarray) -> np.ndarray:
    """Remove solver-level infeasibility from ``x`` where a cheap exact fix exists."""
    if isinstance(V, AffineSubspace):
        x0, N = _affine_param(V.A, V.c, 1e-6)
        return x0 + N @ (N.T @ (x - x0))
    if isinstance(V, SubspaceBall):
        comp = V.complement()
        if comp.shape[0]:
            x = x - comp.T @ np.linalg.lstsq(comp @ comp.T, comp @ x, rcond=None)[0]
        nx = V.norm(x)
        return x * (V.lam / nx) if nx > V.lam else x
    if isinstance(V, BlockProduct):
        off = V.offsets
        return np.concatenate([snap(p, x[off[i]:off[i + 1]]) for i, p in enumerate(V.parts)])
    return x


class _CenterProgram:
    """Cached conic model of min_v max_b ||v - b|| over V."""

    def __init__(self, norm, V, pts):
        self.norm, self.V, self.pts = norm, V, pts
        self.problem, self.v, self.t = conic.center_problem(norm, V, pts)

    def run(self, tol=None):
        status = conic.solve(self.problem, tol)
        # t is free, so infeasibility can only come from V itself
        if status in ("infeasible", "infeasible_inaccurate"):
            raise InstanceError("constraint set is empty")
        if self.v.value is None:
            raise SolverError(f"conic center solve ended with status {status}")
        x = snap(self.V, np.asarray(self.v.value, dtype=float))
        iters = self.problem.solver_stats.num_iters or 0
        return x, float(self.t.value), status, iters


def solve_uniformly_convex(norm: NormSpec, V, F, tol: float = DEFAULT_TOL) -> CenterSolution:
    """A single restricted center for norms built from p-norm blocks.

    The radius reported is r(v, F) evaluated at the returned (feasible) point,
    so it is an upper bound on rad_V(F); ``gap`` is its excess over the
    solver's optimal value.
    """
    pts = as_points(F)
    _check(norm, V, pts)
    prog = _CenterProgram(norm, V, pts)
    x, t, status, iters = prog.run(tol if tol > 1e-10 else None)
    r = farthest_radius(norm, x, pts)
    gap = max(0.0, r - t)
    converged = status == "optimal" and contains(V, x, max(tol, 1e-9))
    if not converged:
        log.warning("conic center solve: status %s, gap %.3g", status, gap)
    return CenterSolution(radius=r, status="iterative", point=x, tol=tol, iterations=iters,
                          gap=gap, converged=converged)


def solve(norm: NormSpec, V, F, tol: float = DEFAULT_TOL) -> CenterSolution:
    """Dispatch to the exact polyhedral path when possible, the conic path otherwise."""
    if is_polyhedral(norm) and is_polyhedral_set(V):
        return solve_polyhedral(norm, V, F, tol)
    return solve_uniformly_convex(norm, V, F, tol)


def radius(norm: NormSpec, V, F, tol: float = DEFAULT_TOL) -> float:
    if is_polyhedral(norm) and is_polyhedral_set(V):
        return polyhedral_radius(norm, V, F)[0]
    return solve_uniformly_convex(norm, V, F, tol).radius


# -- the truncated-step iteration ----------------------------------------------

def _blocks(norm: NormSpec):
    if isinstance(norm, PNorm):
        return [norm], [0, norm.dim]
    if isinstance(norm, DirectSum) and all(isinstance(b, PNorm) for b in norm.blocks):
        return list(norm.blocks), norm.offsets
    raise InstanceError("amir_iterate needs a p-norm or a direct sum of p-norm blocks")


class _ExtremePicker:
    """Pick g far inside the near-optimal set: maximise a random functional
    over {v in V : r(v, B) <= level}."""

    def __init__(self, norm, V, pts, rng):
        self.rng = rng
        self.v = cp.Variable(norm.dim)
        self.level = cp.Parameter(nonneg=True)
        self.direction = cp.Parameter(norm.dim)
        cons = conic.member(V, self.v)
        for b in pts:
            cons.extend(conic.norm_le(norm, self.v - b, self.level))
        self.problem = cp.Problem(cp.Maximize(self.direction @ self.v), cons)

    def __call__(self, level):
        self.level.value = level
        self.direction.value = self.rng.normal(size=self.v.shape[0])
        try:
            conic.solve(self.problem, 1e-10)
        except SolverError:
            return None
        return None if self.v.value is None else np.asarray(self.v.value, dtype=float)


def amir_iterate(norm: NormSpec, B, eps0: float = 1.0, tol: float = 1e-8,
                 ball_radius: float = 1.0, g_strategy: str = "extreme",
                 seed: int = 0) -> CenterSolution:
    """Restricted center of ``B`` in the ball of radius ``ball_radius`` of a
    max-product of l_p blocks, by successive truncated moves.

    The problem is first normalised so the restricted radius is 1 (divide
    ``B`` and the ball by R).  Starting from f_0 with r(f_0) <= 1 + d(eps0),
    each step picks some g with r(g) <= 1 + d(eps0/2^(n+1)) and moves every
    block of f_n toward g, but by at most 2 eps0/2^n in that block:

        f_{n+1}(t) = f_n(t) + a(t) (g(t) - f_n(t)),
        a(t) = min(1, 2 eps0/2^n / ||g(t) - f_n(t)||).

    Here d is the convexity modulus of the blocks.  Iteration stops once
    d(eps0/2^n) < tol.  Step lengths in the trace are measured in the
    normalised frame; radii are reported in the original scale.
    """
    blocks, off = _blocks(norm)
    pts = as_points(B)
    if pts.shape[1] != norm.dim:
        raise InstanceError("point dimension does not match the norm")
    if not 0 < eps0 <= 2:
        raise InstanceError("eps0 must lie in (0, 2]")
    V = SubspaceBall(np.eye(norm.dim), ball_radius, norm)

    exact = _CenterProgram(norm, V, pts)
    xs, _, _, _ = exact.run()
    R = farthest_radius(norm, xs, pts)
    if R <= 0:
        raise PreconditionError("restricted radius is zero; nothing to iterate")

    Bn = pts / R
    Vn = SubspaceBall(np.eye(norm.dim), ball_radius / R, norm)
    center_n = snap(Vn, xs / R)

    def dprime(e):
        return norm_modulus(norm, e)

    def rn(x):
        return farthest_radius(norm, x, Bn)

    # seed: a coarse solve, falling back to the accurate center
    d0 = dprime(eps0)
    coarse = _CenterProgram(norm, Vn, Bn)
    try:
        f, _, _, _ = coarse.run(d0 / 2)
    except SolverError:
        f = center_n
    if rn(f) > 1 + d0:
        f = center_n
    trace = IterationTrace(eps0=eps0, R=R, seed_radius=R * rn(f), seed_delta_prime=d0)

    rng = np.random.default_rng(seed)
    picker = _ExtremePicker(norm, Vn, Bn, rng) if g_strategy == "extreme" else None

    n = 0
    while dprime(eps0 / 2 ** n) >= tol:
        if n >= ITERATION_CAP:
            break
        step_cap = 2 * eps0 / 2 ** n
        target = 1 + dprime(eps0 / 2 ** (n + 1))
        g = None
        if picker is not None:
            g = picker(1 + (target - 1) / 2)
            if g is not None:
                g = snap(Vn, g)
                if rn(g) > target:
                    g = None
        if g is None:
            g = center_n
        f_new = f.copy()
        truncated = 0
        for t, blk in enumerate(blocks):
            sl = slice(off[t], off[t + 1])
            gap = float(blk(g[sl] - f[sl]))
            a = 1.0 if gap <= step_cap else step_cap / gap
            truncated += a < 1.0
            f_new[sl] = f[sl] + a * (g[sl] - f[sl])
        f_new = snap(Vn, f_new)
        trace.steps.append(IterationStep(n=n, step=float(norm(f_new - f)), radius=R * rn(f_new),
                                    delta_prime=dprime(eps0 / 2 ** (n + 1)),
                                    truncated=int(truncated)))
        f = f_new
        n += 1

    x = f * R
    r = farthest_radius(norm, x, pts)
    return CenterSolution(radius=r, status="iterative", point=x, tol=tol, iterations=n,
                          gap=max(0.0, r - R), converged=n < ITERATION_CAP, trace=trace)


# -- enlargement sets ----------------------------------------------------------

def affine_hull_param(V) -> tuple[np.ndarray, np.ndarray]:
    """x0, N (orthonormal columns) whose span contains V - x0."""
    if isinstance(V, WholeSpace):
        return np.zeros(V.dim), np.eye(V.dim)
    if isinstance(V, AffineSubspace):
        return _affine_param(V.A, V.c, 1e-6)
    if isinstance(V, Polytope):
        param = _affine_param(V.A, V.b, 1e-6)
        return param if param is not None else (np.zeros(V.dim), np.zeros((V.dim, 0)))
    if isinstance(V, SubspaceBall):
        if V.basis.shape[0] == 0:
            return np.zeros(V.dim), np.zeros((V.dim, 0))
        q, r = np.linalg.qr(V.basis.T)
        rank = int(np.sum(np.abs(np.diag(r)) > 1e-12))
        return np.zeros(V.dim), q[:, :rank]
    if isinstance(V, BlockProduct):
        x0s, Ns = zip(*(affine_hull_param(p) for p in V.parts))
        N = np.zeros((V.dim, sum(n.shape[1] for n in Ns)))
        r = c = 0
        for n_ in Ns:
            N[r:r + n_.shape[0], c:c + n_.shape[1]] = n_
            r += n_.shape[0]
            c += n_.shape[1]
        return np.concatenate(x0s), N
    raise InstanceError(f"unsupported set {type(V).__name__}")


def sample_enlargement(norm: NormSpec, V, F, level: float, count: int = 4000,
                       seed: int = 0, include=None) -> np.ndarray:
    """Rejection sample {v in V : r(v, F) <= level}.

    Candidates are drawn uniformly from the affine hull of V intersected with
    the box prod_i [max_b b_i - level, min_b b_i + level], which contains the
    target set for any norm dominating the max-norm.
    """
    pts = as_points(F)
    lo = pts.max(axis=0) - level
    hi = pts.min(axis=0) + level
    x0, N = affine_hull_param(V)
    rng = np.random.default_rng(seed)
    if N.shape[1] == 0:
        cand = x0[None, :]
    else:
        # interval bounds of y = N^T (x - x0) over the box
        a, b = lo - x0, hi - x0
        ylo = np.sum(np.minimum(N * a[:, None], N * b[:, None]), axis=0)
        yhi = np.sum(np.maximum(N * a[:, None], N * b[:, None]), axis=0)
        Y = rng.uniform(ylo, yhi, size=(count, N.shape[1]))
        cand = x0 + Y @ N.T
    if include is not None:
        cand = np.vstack([np.atleast_2d(include), cand])
    keep = farthest_radius_many(norm, cand, pts) <= level + 1e-12
    keep &= np.array([contains(V, c, 1e-9) for c in cand])
    return cand[keep]


def enlargement(norm: NormSpec, V, F, delta: float, tol: float = DEFAULT_TOL,
                count: int = 4000, seed: int = 0):
    """cent_V(F, delta) = {v in V : r(v, F) <= rad_V(F) + delta}.

    A :class:`Polytope` on the exact path, otherwise an array of samples.
    """
    if delta < 0:
        raise InstanceError("delta must be non-negative")
    if is_polyhedral(norm) and is_polyhedral_set(V):
        rad, _ = polyhedral_radius(norm, V, F)
        return ball_intersection(norm, F, rad + delta, V, tol)
    sol = solve_uniformly_convex(norm, V, F, tol)
    return sample_enlargement(norm, V, F, sol.radius + delta, count, seed, include=sol.point)
