"""Dense two-phase simplex with Bland's anti-cycling rule.

Solves ``min c @ x  s.t.  A_ub @ x <= b_ub,  A_eq @ x = b_eq`` with every
variable free.  Problems here are desk sized (tens of rows), so a dense
tableau is fine; the optimal basis is re-solved against the original data
at the end so the returned point is accurate to rounding, not to the
accumulated error of the pivots.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverError

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-9
MAX_PIVOTS = 20000


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None
    fun: float
    pivots: int

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


def _pivot(T, basis, row, col):
    T[row] /= T[row, col]
    colvals = T[:, col].copy()
    colvals[row] = 0.0
    T -= np.outer(colvals, T[row])
    basis[row] = col


def _run(T, basis, ncols, allowed):
    """Bland's-rule iterations on tableau ``T`` whose last row holds reduced costs."""
    pivots = 0
    m = T.shape[0] - 1
    while True:
        cost = T[-1, :ncols]
        cand = np.nonzero((cost < -PIVOT_TOL) & allowed)[0]
        if cand.size == 0:
            return "optimal", pivots
        col = cand[0]
        column = T[:m, col]
        pos = np.nonzero(column > PIVOT_TOL)[0]
        if pos.size == 0:
            return "unbounded", pivots
        ratios = T[pos, -1] / column[pos]
        best = ratios.min()
        ties = pos[ratios <= best + 1e-12 * max(1.0, abs(best))]
        row = ties[np.argmin(basis[ties])]
        _pivot(T, basis, row, col)
        pivots += 1
        if pivots > MAX_PIVOTS:
            raise SolverError("simplex pivot limit exceeded")


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, float).ravel()
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, float).ravel()
    if A_ub.size == 0:
        A_ub = np.zeros((0, n))
    if A_eq.size == 0:
        A_eq = np.zeros((0, n))
    mu, me = A_ub.shape[0], A_eq.shape[0]
    m = mu + me

    # standard form: x = u - w, slack s for the inequality rows
    nstd = 2 * n + mu
    A = np.zeros((m, nstd))
    A[:mu, :n], A[:mu, n:2 * n] = A_ub, -A_ub
    A[:mu, 2 * n:] = np.eye(mu)
    A[mu:, :n], A[mu:, n:2 * n] = A_eq, -A_eq
    b = np.concatenate([b_ub, b_eq])
    neg = b < 0
    A[neg] *= -1
    b = np.where(neg, -b, b)
    cstd = np.concatenate([c, -c, np.zeros(mu)])

    if m == 0:
        if np.any(np.abs(c) > PIVOT_TOL):
            return LPResult("unbounded", None, -np.inf, 0)
        return LPResult("optimal", np.zeros(n), 0.0, 0)

    # phase 1 with one artificial per row
    ntot = nstd + m
    T = np.zeros((m + 1, ntot + 1))
    T[:m, :nstd] = A
    T[:m, nstd:ntot] = np.eye(m)
    T[:m, -1] = b
    T[-1, :nstd] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = np.arange(nstd, ntot)
    allowed = np.ones(ntot, dtype=bool)
    _, piv1 = _run(T, basis, ntot, allowed)
    scale = max(1.0, float(np.max(np.abs(b))))
    if -T[-1, -1] > FEAS_TOL * scale:
        return LPResult("infeasible", None, np.nan, piv1)

    # drive artificials out of the basis; drop rows that are redundant
    keep = np.ones(m, dtype=bool)
    for r in range(m):
        if basis[r] >= nstd:
            row = T[r, :nstd]
            nz = np.nonzero(np.abs(row) > PIVOT_TOL)[0]
            if nz.size:
                _pivot(T, basis, r, nz[0])
            else:
                keep[r] = False
    rows = np.nonzero(keep)[0]
    T = np.vstack([T[rows][:, list(range(nstd)) + [ntot]], np.zeros((1, nstd + 1))])
    basis = basis[rows]
    A_kept, b_kept = A[rows], b[rows]

    # phase 2
    T[-1, :nstd] = cstd
    T[-1, -1] = 0.0
    for r, j in enumerate(basis):
        T[-1] -= cstd[j] * T[r]
    status, piv2 = _run(T, basis, nstd, np.ones(nstd, dtype=bool))
    if status == "unbounded":
        return LPResult("unbounded", None, -np.inf, piv1 + piv2)

    z = np.zeros(nstd)
    if basis.size:
        Bm = A_kept[:, basis]
        try:
            zb = np.linalg.solve(Bm, b_kept)
        except np.linalg.LinAlgError:
            zb = T[:-1, -1]
        # fall back to the tableau values if the re-solve drifted
        if not np.all(np.isfinite(zb)) or np.max(np.abs(zb - T[:-1, -1])) > 1e-6 * scale:
            zb = T[:-1, -1]
        z[basis] = zb
    x = z[:n] - z[n:2 * n]
    return LPResult("optimal", x, float(c @ x), piv1 + piv2)
