"""Probing how cent_V(F) moves when F moves.

All quantities are exact on the polyhedral path: center sets are polytopes,
and the one-sided deviation sup_{x in P} d(x, Q) is attained at a vertex of P.

Naming of the two deviations for a base set F and a perturbation F':
    lower_dev = sup over cent(F)  of d(., cent(F'))   (lower semicontinuity)
    upper_dev = sup over cent(F') of d(., cent(F))    (upper semicontinuity)
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import solver
from .domain import (AffineSubspace, SubspaceBall, WholeSpace, ball_intersection,
                     is_polyhedral_set, null_space, polytope_hausdorff, scale_set)
from .errors import InstanceError, PreconditionError
from .norms import (DEFAULT_TOL, NormSpec, as_points, hausdorff_finite, is_polyhedral)


def trial_seed(seed: int, *index: int) -> int:
    """A 63-bit seed derived from a run seed and a trial index."""
    state = np.random.SeedSequence([int(seed), *map(int, index)]).generate_state(2, np.uint32)
    return int(state[0]) << 31 | int(state[1]) >> 1


def perturb(F, delta: float, seed: int, norm: NormSpec | None = None) -> np.ndarray:
    """Move every point by a vector of norm at most ``delta``.

    Direction is uniform on the Euclidean sphere, rescaled to the unit sphere
    of ``norm`` (max-norm by default); the length is delta * U(0, 1).  The
    cardinality is kept, so d_H(F, F') <= delta.
    """
    pts = np.array(as_points(F), dtype=float)
    if delta < 0:
        raise InstanceError("delta must be non-negative")
    if delta == 0:
        return pts
    rng = np.random.default_rng(seed)
    m, d = pts.shape
    u = rng.normal(size=(m, d))
    lengths = norm(u) if norm is not None else np.max(np.abs(u), axis=1)
    u /= np.where(lengths > 0, lengths, 1.0)[:, None]
    # shave one ulp-scale factor so the bound survives rounding
    r = delta * rng.uniform(size=m) * (1 - 1e-9)
    return pts + u * r[:, None]


@dataclass
class ContinuityRecord:
    delta: float
    dH_F: float
    dH_cent: float
    lower_dev: float
    upper_dev: float
    seed: int

    CSV_HEADER = "delta,dH_F,dH_cent,lower_dev,upper_dev,seed"

    def row(self):
        return [self.delta, self.dH_F, self.dH_cent, self.lower_dev, self.upper_dev, self.seed]


def _require_exact(norm, V):
    if not (is_polyhedral(norm) and is_polyhedral_set(V)):
        raise InstanceError("continuity probing needs a max-family norm and polyhedral V")


def _one_trial(args):
    norm, V, F, cent, delta, seed, tol = args
    Fp = perturb(F, delta, seed, norm)
    cp = solver.solve_polyhedral(norm, V, Fp, tol).polytope
    dH, low, up = polytope_hausdorff(norm, cent, cp, tol)
    return ContinuityRecord(float(delta), hausdorff_finite(norm, F, Fp), dH, low, up, seed)


def _map(fn, jobs, items):
    if jobs and jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(it) for it in items]


def continuity_modulus(norm: NormSpec, V, F, deltas, trials: int = 10, seed: int = 0,
                       tol: float = DEFAULT_TOL, jobs: int = 1) -> list[ContinuityRecord]:
    """One record per (delta, trial); trial seeds come from (seed, k, j)."""
    _require_exact(norm, V)
    pts = as_points(F)
    cent = solver.solve_polyhedral(norm, V, pts, tol).polytope
    cent.vertices(tol)
    work = [(norm, V, pts, cent, float(d), trial_seed(seed, k, j), tol)
            for k, d in enumerate(deltas) for j in range(trials)]
    return _map(_one_trial, jobs, work)


def lipschitz_estimate(records: list[ContinuityRecord], floor: float = 1e-12):
    """max dH_cent / dH_F over the records, skipping denominators below ``floor``.

    Returns ``(estimate, used)``; the estimate is nan when nothing was usable.
    """
    ratios = [r.dH_cent / r.dH_F for r in records if r.dH_F >= floor]
    return (max(ratios) if ratios else float("nan")), len(ratios)


# -- quantitative ball-intersection stability -----------------------------------

@dataclass
class StabilityConstants:
    R_F: float
    alpha: float
    eps: float
    gamma: float
    L: float
    delta: float


def stability_constants(R_F: float, alpha: float, eps: float) -> StabilityConstants:
    """2 gamma = alpha - R_F, L = alpha + R_F + 2, delta = min(1, gamma/2, gamma eps / 2L)."""
    if alpha <= R_F:
        raise PreconditionError(f"alpha = {alpha} must exceed the restricted radius {R_F}")
    if eps <= 0:
        raise InstanceError("eps must be positive")
    gamma = (alpha - R_F) / 2
    L = alpha + R_F + 2
    return StabilityConstants(R_F, alpha, eps, gamma, L, min(1.0, gamma / 2, gamma * eps / (2 * L)))


@dataclass
class StabilityResult:
    constants: StabilityConstants
    verified: bool
    measured: float  # largest d_H over the trials
    trials: int
    failures: int


def _stability_trial(args):
    norm, V, F, base, alpha, delta, seed, tol = args
    rng = np.random.default_rng(seed)
    Fp = perturb(F, delta, seed, norm)
    beta = alpha + delta * rng.uniform(-1, 1) * (1 - 1e-9)
    other = ball_intersection(norm, Fp, beta, V, tol)
    return polytope_hausdorff(norm, base, other, tol)[0]


def lemma34_check(norm: NormSpec, V, F, alpha: float, eps: float, trials: int = 100,
                  seed: int = 0, tol: float = DEFAULT_TOL, jobs: int = 1) -> StabilityResult:
    """Draw (F', beta) with d_H(F, F') < delta and |alpha - beta| < delta and
    measure d_H between the two ball intersections inside V."""
    _require_exact(norm, V)
    pts = as_points(F)
    R_F = solver.polyhedral_radius(norm, V, pts)[0]
    k = stability_constants(R_F, alpha, eps)
    base = ball_intersection(norm, pts, alpha, V, tol)
    base.vertices(tol)
    work = [(norm, V, pts, base, alpha, k.delta, trial_seed(seed, j), tol) for j in range(trials)]
    values = _map(_stability_trial, jobs, work)
    measured = max(values) if values else 0.0
    failures = sum(v >= eps for v in values)
    return StabilityResult(k, failures == 0, float(measured), trials, failures)


# -- scaling and saturation -------------------------------------------------------

def _vertex_match(A: np.ndarray, B: np.ndarray) -> float:
    """Symmetric max-abs mismatch between two vertex lists (inf if sizes differ)."""
    if A.shape != B.shape:
        return float("inf")
    if A.size == 0:
        return 0.0
    D = np.max(np.abs(A[:, None, :] - B[None, :, :]), axis=2)
    return float(max(D.min(axis=0).max(), D.min(axis=1).max()))


@dataclass
class ScalingReport:
    lam: float
    radius_scaled: float  # rad over lam B_Y at F
    radius_unit: float  # rad over B_Y at F / lam
    correspondence_error: float  # vertex mismatch between cent_{lam B_Y}(F) and lam cent_{B_Y}(F/lam)
    threshold: float  # sup ||b|| + rad_Y(F)
    saturated: bool | None  # cent_Y(F) == cent_{lam B_Y}(F); None when lam <= threshold
    saturation_error: float
    records_scaled: list
    records_unit: list


def scaling_transfer_check(norm: NormSpec, basis, lam: float, F, deltas=(),
                           trials: int = 5, seed: int = 0,
                           tol: float = DEFAULT_TOL) -> ScalingReport:
    """Compare cent over lam B_Y at F with lam times cent over B_Y at F / lam,
    and cent_Y(F) with cent over lam B_Y above the saturation threshold."""
    if lam <= 0:
        raise InstanceError("lambda must be positive")
    pts = as_points(F)
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    unit = SubspaceBall(basis, 1.0, norm)
    big = scale_set(unit, lam)
    s_big = solver.solve_polyhedral(norm, big, pts, tol)
    s_unit = solver.solve_polyhedral(norm, unit, pts / lam, tol)
    Vb = s_big.polytope.vertices(tol)
    Vu = s_unit.polytope.vertices(tol) * lam
    corr = _vertex_match(Vb, Vu)

    comp = null_space(basis).T
    Y = AffineSubspace(comp, np.zeros(comp.shape[0])) if comp.shape[0] else None
    Yset = Y if Y is not None else WholeSpace(norm.dim)
    s_Y = solver.solve_polyhedral(norm, Yset, pts, tol)
    threshold = float(np.max(norm(pts))) + s_Y.radius
    sat_err = float("nan")
    saturated = None
    if s_Y.polytope.is_bounded():
        sat_err = _vertex_match(s_Y.polytope.vertices(tol), Vb)
        if lam > threshold:
            saturated = sat_err <= 1e-9
    elif lam > threshold:
        saturated = False

    rec_big = continuity_modulus(norm, big, pts, deltas, trials, seed, tol) if len(deltas) else []
    rec_unit = (continuity_modulus(norm, unit, pts / lam, [d / lam for d in deltas], trials,
                                   seed, tol) if len(deltas) else [])
    return ScalingReport(lam, s_big.radius, s_unit.radius, corr, threshold, saturated, sat_err,
                         rec_big, rec_unit)
