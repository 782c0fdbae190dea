"""cvxpy formulations for the non-polyhedral path (p-norm blocks).

Only the modelling lives here; callers decide what to do with the optimum.
"""
from __future__ import annotations

import warnings

import cvxpy as cp
import numpy as np

from . import domain
from .errors import InstanceError, SolverError
from .norms import MaxNorm, NormSpec, PNorm


def norm_le(norm: NormSpec, expr, bound) -> list:
    """Constraints equivalent to ``norm(expr) <= bound``."""
    if isinstance(norm, MaxNorm):
        return [cp.norm(expr, "inf") <= bound]
    if isinstance(norm, PNorm):
        if norm.dim == 1:
            return [cp.abs(expr) <= bound]
        return [cp.pnorm(expr, norm.p) <= bound]
    out = []
    for off, blk in zip(norm.offsets, norm.blocks):
        out.extend(norm_le(blk, expr[off:off + blk.dim], bound))
    return out


def member(V, v) -> list:
    """Constraints expressing ``v in V`` for any supported constraint set."""
    if isinstance(V, domain.WholeSpace):
        return []
    if isinstance(V, domain.AffineSubspace):
        return [V.A @ v == V.c]
    if isinstance(V, domain.Polytope):
        cons = []
        if V.G.shape[0]:
            cons.append(V.G @ v <= V.h)
        if V.A.shape[0]:
            cons.append(V.A @ v == V.b)
        return cons
    if isinstance(V, domain.SubspaceBall):
        cons = norm_le(V.norm, v, V.lam)
        comp = V.complement()
        if comp.shape[0]:
            cons.append(comp @ v == 0)
        return cons
    if isinstance(V, domain.BlockProduct):
        cons, off = [], 0
        for part in V.parts:
            cons.extend(member(part, v[off:off + part.dim]))
            off += part.dim
        return cons
    raise TypeError(f"unsupported constraint set {type(V).__name__}")


_ACCURATE = dict(tol_gap_abs=1e-11, tol_gap_rel=1e-11, tol_feas=1e-11, tol_ktratio=1e-9,
                 max_iter=500)


def solve(problem: cp.Problem, tol: float | None = None):
    opts = dict(_ACCURATE)
    if tol is not None:
        t = float(min(max(tol, 1e-11), 1e-3))
        opts.update(tol_gap_abs=t, tol_gap_rel=t, tol_feas=min(t, 1e-8))
    try:
        with warnings.catch_warnings():
            # inaccurate solves are reported through the status instead
            warnings.simplefilter("ignore", UserWarning)
            problem.solve(solver=cp.CLARABEL, **opts)
    except cp.error.SolverError as exc:
        raise SolverError(str(exc)) from exc
    return problem.status


def center_problem(norm: NormSpec, V, F: np.ndarray):
    """min t over v in V with ||v - b|| <= t for all b in F; returns (problem, v, t)."""
    v = cp.Variable(norm.dim)
    t = cp.Variable()
    cons = member(V, v)
    for b in F:
        cons.extend(norm_le(norm, v - b, t))
    return cp.Problem(cp.Minimize(t), cons), v, t


def distance(norm: NormSpec, x: np.ndarray, V) -> tuple[float, np.ndarray]:
    v = cp.Variable(norm.dim)
    t = cp.Variable()
    prob = cp.Problem(cp.Minimize(t), member(V, v) + norm_le(norm, v - x, t))
    status = solve(prob)
    if status in ("infeasible", "infeasible_inaccurate"):
        raise InstanceError("constraint set is empty")
    if status not in ("optimal", "optimal_inaccurate"):
        raise SolverError(f"distance problem ended with status {status}")
    return float(t.value), np.asarray(v.value, dtype=float)
