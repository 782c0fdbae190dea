"""The stability functional S(F, delta) and checks built on it.

S(F, delta) = sup { d(v, cent_V(F)) : v in V, r(v, F) <= rad_V(F) + delta }.

Property (P1) at F means S(F, delta) -> 0 as delta -> 0.  In the polyhedral
case both sets are polytopes and d(., cent) is convex, so the supremum is
attained at a vertex of the enlargement set and S is computed exactly.
Elsewhere only a sampled lower bound is available.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import solver
from .domain import ball_intersection, is_polyhedral_set, max_distance_over
from .errors import CapabilityError, InstanceError
from .norms import DEFAULT_TOL, NormSpec, as_points, is_polyhedral

log = logging.getLogger(__name__)

GRID_LEVELS = 20
SAMPLE_COUNT = 4000


@dataclass
class SValue:
    delta: float
    value: float
    witness: np.ndarray | None
    status: str  # "exact" or "sampled"
    samples: int = 0


class P1Context:
    """rad_V(F) and cent_V(F) solved once, reused for every delta."""

    def __init__(self, norm: NormSpec, V, F, tol: float = DEFAULT_TOL, seed: int = 0,
                 samples: int = SAMPLE_COUNT):
        self.norm, self.V, self.F = norm, V, as_points(F)
        self.tol, self.seed, self.samples = tol, seed, samples
        self.exact = is_polyhedral(norm) and is_polyhedral_set(V)
        self.solution = solver.solve(norm, V, self.F, tol)
        self.radius = self.solution.radius
        self._cent_ok = True
        if self.exact:
            try:
                self.solution.polytope.vertices(tol)
            except CapabilityError:
                self._cent_ok = False

    def enlargement(self, delta: float):
        return ball_intersection(self.norm, self.F, self.radius + delta, self.V, self.tol)

    def s_value(self, delta: float) -> SValue:
        if delta < 0:
            raise InstanceError("delta must be non-negative")
        if self.exact and self._cent_ok:
            E = self.enlargement(delta)
            try:
                value, wit = max_distance_over(self.norm, E, self.solution.polytope, self.tol)
                return SValue(delta, value, wit, "exact")
            except CapabilityError:
                pass
        return self._sampled(delta)

    def _sampled(self, delta: float) -> SValue:
        from .domain import distance_to_set
        pts = solver.sample_enlargement(self.norm, self.V, self.F, self.radius + delta,
                                        self.samples, self.seed)
        if pts.shape[0] == 0:
            return SValue(delta, 0.0, None, "sampled", 0)
        if self.solution.kind == "point":
            d = self.norm(pts - self.solution.point)
        else:
            d = np.array([distance_to_set(self.norm, p, self.solution.polytope, self.tol)
                          for p in pts])
        i = int(np.argmax(d))
        return SValue(delta, float(d[i]), pts[i], "sampled", int(pts.shape[0]))


def s_value(norm: NormSpec, V, F, delta: float, tol: float = DEFAULT_TOL) -> SValue:
    return P1Context(norm, V, F, tol).s_value(delta)


def geometric_grid(top: float, levels: int = GRID_LEVELS) -> np.ndarray:
    """top * 2^-k for k = 0 .. levels-1, in decreasing order."""
    return top * 2.0 ** -np.arange(levels)


@dataclass
class P1Curve:
    deltas: np.ndarray
    values: np.ndarray
    status: str
    radius: float
    estimates: dict = field(default_factory=dict)

    @property
    def monotone(self) -> bool:
        order = np.argsort(self.deltas)
        v = self.values[order]
        return bool(np.all(np.diff(v) >= -1e-9))


def p1_curve(norm: NormSpec, V, F, deltas, tol: float = DEFAULT_TOL, seed: int = 0,
             eps: list | None = None) -> P1Curve:
    ctx = P1Context(norm, V, F, tol, seed)
    deltas = np.asarray(sorted(float(d) for d in deltas))
    vals = [ctx.s_value(d) for d in deltas]
    status = "exact" if all(v.status == "exact" for v in vals) else "sampled"
    curve = P1Curve(deltas, np.array([v.value for v in vals]), status, ctx.radius)
    for e in eps or []:
        curve.estimates[float(e)] = _estimate(ctx, e)
    return curve


@dataclass
class DeltaEstimate:
    eps: float
    delta: float
    s_at_delta: float
    certified: bool  # False when even the smallest grid delta fails


def _estimate(ctx: P1Context, eps: float, levels: int = GRID_LEVELS) -> DeltaEstimate:
    if eps <= 0:
        raise InstanceError("eps must be positive")
    for d in geometric_grid(eps, levels):
        s = ctx.s_value(float(d)).value
        if s < eps:
            return DeltaEstimate(eps, float(d), s, True)
    log.warning("no grid delta certified for eps=%g", eps)
    return DeltaEstimate(eps, 0.0, float("nan"), False)


def estimate_delta(norm: NormSpec, V, F, eps: float, tol: float = DEFAULT_TOL,
                   levels: int = GRID_LEVELS) -> DeltaEstimate:
    """Largest delta in {eps 2^-k : k < levels} with S(F, delta) < eps."""
    return _estimate(P1Context(norm, V, F, tol), eps, levels)


@dataclass
class Containment:
    holds: bool
    value: float  # S(F, delta)
    witness: np.ndarray | None  # a vertex with d(v, cent) > eps when violated


def check_containment(norm: NormSpec, V, F, delta: float, eps: float,
                      tol: float = DEFAULT_TOL) -> Containment:
    """Whether cent_V(F, delta) lies in cent_V(F) + eps B_X."""
    if eps <= 0:
        raise InstanceError("eps must be positive")
    s = P1Context(norm, V, F, tol).s_value(delta)
    holds = s.value <= eps + tol
    return Containment(holds, s.value, None if holds else s.witness)
