"""Command line entry point.

Exit codes: 0 success, 1 internal solver failure, 2 instance error,
3 capability error, 4 verification failure (a claim was falsified; the
report holds the witness).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

import numpy as np

from . import continuity, directsum, oracle, p1, solver
from . import io as cio
from .domain import SubspaceBall, contains, vertex_set_distance
from .errors import CapabilityError, InstanceError, SolverError
from .norms import DEFAULT_TOL, DirectSum

log = logging.getLogger("cheby")

EXIT_OK, EXIT_SOLVER, EXIT_INSTANCE, EXIT_CAPABILITY, EXIT_FALSIFIED = 0, 1, 2, 3, 4
REPORT_VERSION = 1
PINNED_ENV = "CHEBY_PINNED"


def parse_deltas(spec: str | None, top: float) -> list[float]:
    """``geometric:K`` -> top * 2^-k for k < K, plus 0; otherwise a comma list."""
    if spec is None:
        spec = "geometric:20"
    if spec.startswith("geometric:"):
        try:
            k = int(spec.split(":", 1)[1])
        except ValueError as exc:
            raise InstanceError(f"cannot parse --deltas {spec!r}") from exc
        if k < 1:
            raise InstanceError("geometric grid needs at least one level")
        return [0.0] + sorted(float(d) for d in p1.geometric_grid(top, k))
    try:
        vals = [float(x) for x in spec.split(",") if x.strip()]
    except ValueError as exc:
        raise InstanceError(f"cannot parse --deltas {spec!r}") from exc
    if any(v < 0 for v in vals):
        raise InstanceError("deltas must be non-negative")
    return vals


def _opt(args, inst, name, default=None):
    v = getattr(args, name, None)
    if v is not None:
        return v
    return inst.task.get(name, default)


def _centers_json(sol: solver.CenterSolution):
    if sol.kind == "polytope":
        return {"kind": "polytope", "vertices": sol.polytope.vertices(sol.tol)}
    if sol.kind == "point":
        return {"kind": "point", "point": sol.point}
    return {"kind": "sample", "count": int(sol.samples.shape[0]), "points": sol.samples}


def _trace_json(trace: solver.IterationTrace):
    return {
        "eps0": trace.eps0, "R": trace.R, "seed_radius": trace.seed_radius,
        "seed_delta_prime": trace.seed_delta_prime,
        "steps": [{"n": s.n, "step": s.step, "radius": s.radius, "delta_prime": s.delta_prime,
                   "truncated": s.truncated} for s in trace.steps],
    }


# -- commands ------------------------------------------------------------------------

def cmd_solve(args, inst, out):
    tol = args.tol
    F = inst.points
    use_amir = args.method == "amir"
    if use_amir:
        eps0 = float(_opt(args, inst, "eps0", 1.0))
        lam = float(inst.V.lam) if isinstance(inst.V, SubspaceBall) else 1.0
        sol = solver.amir_iterate(inst.norm, F, eps0=eps0, tol=max(tol, 1e-8),
                                  ball_radius=lam, seed=args.seed)
    else:
        sol = solver.solve(inst.norm, inst.V, F, tol)
    reps = sol.representatives()
    slack = max(tol, sol.gap) + 1e-9
    radii = [float(np.max(inst.norm(F - c))) for c in reps]
    feasible = [contains(inst.V, c, max(tol, 1e-9) * 10) for c in reps]
    claims = [
        {"claim": "centers attain the radius", "passed": max(radii) <= sol.radius + slack,
         "worst": max(radii) - sol.radius},
        {"claim": "centers are feasible", "passed": all(feasible)},
    ]
    if sol.trace is not None:
        viol = sol.trace.violations()
        claims.append({"claim": "iteration bounds hold", "passed": not viol, "violations": viol})
    results = {"radius": sol.radius, "status": sol.status, "tol": sol.tol,
               "iterations": sol.iterations, "gap": sol.gap, "converged": sol.converged,
               "center_set": _centers_json(sol)}
    if sol.trace is not None:
        results["trace"] = _trace_json(sol.trace)
    return sol.status, results, claims


def cmd_decompose(args, inst, out):
    tol = args.tol
    if inst.msummand is not None:
        k = inst.msummand["y_dim"]
        ms = directsum.MSummandInstance(inst.norm.blocks[0], inst.norm.blocks[1],
                                        inst.msummand["Z"], inst.points)
        res = directsum.msummand_solve(ms, tol)
        full = solver.solve(ms.norm, ms.full_V, inst.points, tol)
        claims = [{"claim": "radius equals max(rad_Z(B(1)), sup |w|)",
                   "passed": abs(res.solution.radius - full.radius) <= 1e-9,
                   "difference": res.solution.radius - full.radius}]
        if res.solution.kind == "polytope" and full.kind == "polytope":
            dev = vertex_set_distance(ms.norm, res.solution.polytope, full.polytope, tol)
            claims.append({"claim": "center set matches the full-space solve",
                           "passed": dev <= 1e-7, "vertex_mismatch": dev})
        results = {"kind": "msummand", "y_dim": k, "rad_y": res.rad_y, "sup_w": res.sup_w,
                   "case": res.case, "radius": res.solution.radius,
                   "full_radius": full.radius, "center_set": _centers_json(res.solution)}
        return res.solution.status, results, claims
    if not isinstance(inst.norm, DirectSum) or len(inst.norm.blocks) != 2:
        raise InstanceError("decompose needs a 2-block directsum norm or an msummand block")
    ds = directsum.DirectSumInstance(inst.norm, inst.V, inst.points)
    r1, r2, rad = directsum.radius_directsum(ds, tol)
    cent = directsum.center_directsum(ds, tol)
    full = solver.solve(ds.norm, ds.V, ds.B, tol)
    defect = directsum.radius_split_defect(ds, 200, args.seed)
    claims = [
        {"claim": "rad = max(r1, r2)", "passed": abs(rad - full.radius) <= 1e-9,
         "difference": rad - full.radius},
        {"claim": "r(v, B) = max of block radii", "passed": defect <= 1e-9, "defect": defect},
    ]
    if cent.kind == "polytope" and full.kind == "polytope":
        dev = vertex_set_distance(ds.norm, cent.polytope, full.polytope, tol)
        claims.append({"claim": "case formula matches the full-space center set",
                       "passed": dev <= 1e-7, "vertex_mismatch": dev})
    results = {"kind": "directsum", "r1": r1, "r2": r2, "radius": rad,
               "full_radius": full.radius, "case": directsum.case_label(r1, r2),
               "center_set": _centers_json(cent)}
    return cent.status, results, claims


def cmd_verify_p1(args, inst, out):
    tol = args.tol
    eps = _opt(args, inst, "eps")
    deltas = parse_deltas(args.deltas or inst.task.get("deltas"), float(eps or 1.0))
    curve = p1.p1_curve(inst.norm, inst.V, inst.points, deltas, tol, args.seed,
                        eps=[eps] if eps else None)
    cio.emit_csv(out, "p1_curve.csv", "delta,s_value", zip(curve.deltas, curve.values))
    s0 = curve.values[curve.deltas == 0]
    smallest = curve.values[curve.deltas > 0]
    claims = [{"claim": "S nondecreasing in delta", "passed": curve.monotone}]
    if s0.size:
        claims.append({"claim": "S(F, 0) = 0", "passed": float(s0[0]) <= 1e-9,
                       "value": float(s0[0])})
    if smallest.size > 1 and curve.status == "exact":
        # evidence of S -> 0: across the grid the value shrinks at least like the
        # square root of the delta ratio (polyhedral curves are linear near 0)
        lo, hi = float(smallest[0]), float(smallest[-1])
        ratio = float(curve.deltas[curve.deltas > 0][0] / curve.deltas[-1])
        claims.append({"claim": "S decreases toward 0",
                       "passed": lo <= max(1e-9, np.sqrt(ratio) * hi),
                       "smallest_delta_value": lo, "largest_delta_value": hi})
    results = {"radius": curve.radius, "status": curve.status,
               "curve": [[d, v] for d, v in zip(curve.deltas, curve.values)],
               "note": "one point set F; nothing is claimed for a family of sets"}
    if eps:
        est = curve.estimates[eps]
        results["estimate"] = {"eps": est.eps, "delta": est.delta, "s_at_delta": est.s_at_delta,
                               "certified": est.certified}
        claims.append({"claim": "some grid delta certifies the eps-containment",
                       "passed": est.certified})
    return curve.status, results, claims


def cmd_probe_continuity(args, inst, out):
    tol = args.tol
    deltas = parse_deltas(args.deltas or inst.task.get("deltas"), 0.1)
    trials = int(_opt(args, inst, "trials", 10))
    recs = continuity.continuity_modulus(inst.norm, inst.V, inst.points, deltas, trials,
                                         args.seed, tol, args.jobs)
    cio.emit_csv(out, "continuity.csv", continuity.ContinuityRecord.CSV_HEADER,
                 (r.row() for r in recs))
    L, used = continuity.lipschitz_estimate(recs)
    claims = [
        {"claim": "perturbations respect the requested size",
         "passed": all(r.dH_F <= r.delta + 1e-12 for r in recs)},
        {"claim": "zero perturbation leaves the center set fixed",
         "passed": all(r.dH_cent <= 1e-9 for r in recs if r.delta == 0)},
    ]
    results = {"records": len(recs), "trials": trials, "lipschitz_estimate": L,
               "lipschitz_ratios_used": used,
               "per_delta": [{"delta": d,
                              "max_dH_cent": max(r.dH_cent for r in recs if r.delta == d),
                              "max_lower_dev": max(r.lower_dev for r in recs if r.delta == d),
                              "max_upper_dev": max(r.upper_dev for r in recs if r.delta == d)}
                             for d in sorted(set(r.delta for r in recs))],
               "note": "bounded-deviation observations on one instance, not a proof"}
    eps = _opt(args, inst, "eps")
    if eps:
        est = p1.estimate_delta(inst.norm, inst.V, inst.points, eps, tol)
        if est.certified:
            small = [r for r in recs if 0 < r.delta <= est.delta / 2]
            extra = continuity.continuity_modulus(inst.norm, inst.V, inst.points,
                                                  [est.delta / 2], trials, args.seed + 1, tol,
                                                  args.jobs)
            worst = max(r.upper_dev for r in small + extra)
            bound = eps + 2 * est.delta + 1e-7
            claims.append({"claim": "upper deviation at size <= delta*/2 stays below "
                                    "eps + 2 delta*", "passed": worst <= bound,
                           "worst": worst, "bound": bound, "delta_star": est.delta})
    return "exact", results, claims


def cmd_lemma34(args, inst, out):
    alpha = _opt(args, inst, "alpha")
    eps = _opt(args, inst, "eps")
    if alpha is None or eps is None:
        raise InstanceError("lemma34 needs --alpha and --eps")
    trials = int(_opt(args, inst, "trials", 100))
    res = continuity.lemma34_check(inst.norm, inst.V, inst.points, float(alpha), float(eps),
                                   trials, args.seed, args.tol, args.jobs)
    k = res.constants
    results = {"R_F": k.R_F, "alpha": k.alpha, "eps": k.eps, "gamma": k.gamma, "L": k.L,
               "delta": k.delta, "trials": res.trials, "measured": res.measured,
               "failures": res.failures, "verified": res.verified}
    claims = [{"claim": "ball intersections stay within eps", "passed": res.verified,
               "measured": res.measured}]
    return "exact", results, claims


def cmd_scale_check(args, inst, out):
    if isinstance(inst.V, SubspaceBall):
        basis = inst.V.basis
    elif "basis" in inst.task:
        basis = np.asarray(inst.task["basis"], dtype=float)
    else:
        raise InstanceError("scale-check needs a subspace_ball constraint or task.basis")
    lams = args.lam if args.lam is not None else inst.task.get("lambda", [0.5, 1, 3, 10])
    if not isinstance(lams, (list, tuple)):
        lams = [lams]
    deltas = parse_deltas(args.deltas, 0.1) if args.deltas else []
    claims, rows = [], []
    for lam in lams:
        rep = continuity.scaling_transfer_check(inst.norm, basis, float(lam), inst.points,
                                                deltas, int(_opt(args, inst, "trials", 5)),
                                                args.seed, args.tol)
        claims.append({"claim": f"cent over {lam:g} B_Y matches the scaled unit problem",
                       "passed": rep.correspondence_error <= 1e-9,
                       "error": rep.correspondence_error})
        if rep.saturated is not None:
            claims.append({"claim": f"cent_Y equals cent over {lam:g} B_Y above the threshold",
                           "passed": bool(rep.saturated), "error": rep.saturation_error})
        rows.append({"lambda": float(lam), "radius_scaled": rep.radius_scaled,
                     "radius_unit": rep.radius_unit, "lambda_times_unit":
                     float(lam) * rep.radius_unit, "threshold": rep.threshold,
                     "above_threshold": float(lam) > rep.threshold,
                     "saturation_error": rep.saturation_error,
                     "max_dH_cent_scaled": max((r.dH_cent for r in rep.records_scaled),
                                               default=0.0),
                     "max_dH_cent_unit_times_lambda": float(lam) * max(
                         (r.dH_cent for r in rep.records_unit), default=0.0)})
    return "exact", {"lambdas": rows}, claims


def cmd_oracle(args, inst, out):
    h = float(_opt(args, inst, "grid_h", 0.005))
    deltas = parse_deltas(args.deltas, 0.1) if args.deltas else []
    if deltas:
        svals, g = oracle.grid_s_value(inst.norm, inst.V, inst.points, deltas, h)
    else:
        g = oracle.grid_radius_center(inst.norm, inst.V, inst.points, h)
    sol = solver.solve(inst.norm, inst.V, inst.points, args.tol)
    diff = abs(sol.radius - g.rad_hat)
    results = {"h": h, "c": g.c, "rad_hat": g.rad_hat, "solver_radius": sol.radius,
               "difference": diff, "evaluated": g.evaluated,
               "center_samples": int(g.centers.shape[0]),
               "center_lo": g.centers.min(axis=0), "center_hi": g.centers.max(axis=0)}
    claims = [{"claim": "|solver - grid| <= h c", "passed": diff <= h * g.c, "bound": h * g.c}]
    if deltas:
        results["s_values"] = [[d, v] for d, v in zip(deltas, svals)]
        results["s_error_bound"] = 2 * h * g.c
        cio.emit_csv(out, "grid_s.csv", "delta,s_value", zip(deltas, svals))
    return "sampled", results, claims


def pin_entry(entry: dict, base_dir: str) -> dict:
    """Run the oracle for one manifest entry and return its pinned record."""
    if "path" in entry:
        inst = cio.parse_instance(os.path.join(base_dir, entry["path"]))
    else:
        inst = cio.build_instance(entry["instance"])
    h = float(entry.get("h", 0.005))
    deltas = [float(d) for d in entry.get("deltas", [])]
    if deltas:
        svals, g = oracle.grid_s_value(inst.norm, inst.V, inst.points, deltas, h)
    else:
        g = oracle.grid_radius_center(inst.norm, inst.V, inst.points, h)
        svals = []
    rec = {"id": entry["id"], "instance": inst.raw, "h": h, "c": g.c, "rad_hat": g.rad_hat,
           "center_count": int(g.centers.shape[0]), "center_lo": g.centers.min(axis=0),
           "center_hi": g.centers.max(axis=0)}
    if deltas:
        rec["s_values"] = [[d, v] for d, v in zip(deltas, svals)]
    return rec


def cmd_pin_derived(args, inst_path, out):
    with open(inst_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    base = os.path.dirname(os.path.abspath(inst_path))
    entries = [pin_entry(e, base) for e in manifest["entries"]]
    payload = {"version": REPORT_VERSION, "generator": "grid oracle", "entries": entries}
    path = os.path.join(out, "pinned.json")
    cio.write_atomic(path, cio.dumps(payload) + "\n")
    return path


def load_pinned(path: str | None = None) -> dict:
    """Pinned oracle records by id, from ``path`` or the CHEBY_PINNED variable."""
    path = path or os.environ.get(PINNED_ENV)
    if not path:
        raise InstanceError(f"no pinned-values file given and {PINNED_ENV} is unset")
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return {e["id"]: e for e in data["entries"]}


COMMANDS = {
    "solve": cmd_solve,
    "decompose": cmd_decompose,
    "verify-p1": cmd_verify_p1,
    "probe-continuity": cmd_probe_continuity,
    "lemma34": cmd_lemma34,
    "scale-check": cmd_scale_check,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cheby", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    names = list(COMMANDS) + ["pin-derived"]
    for name in names:
        p = sub.add_parser(name)
        p.add_argument("--instance", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--eps", type=float)
        p.add_argument("--deltas")
        p.add_argument("--alpha", type=float)
        p.add_argument("--lambda", dest="lam", type=float, action="append")
        p.add_argument("--grid-h", dest="grid_h", type=float)
        p.add_argument("--trials", type=int)
        p.add_argument("--eps0", type=float)
        p.add_argument("--method", choices=["auto", "amir"], default="auto")
        p.add_argument("-v", "--verbose", action="store_true")
    return ap


def _error_payload(exc) -> dict:
    issues = getattr(exc, "issues", None)
    if issues:
        return {"errors": [i.as_dict() for i in issues]}
    return {"errors": [{"path": None, "line": None, "message": str(exc)}]}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = args.out
    try:
        if args.command == "pin-derived":
            t0 = time.perf_counter()
            path = cmd_pin_derived(args, args.instance, out)
            cio.write_atomic(os.path.join(out, "timing.json"),
                             cio.dumps({"wall_seconds": time.perf_counter() - t0}) + "\n")
            print(path)
            return EXIT_OK
        inst = cio.parse_instance(args.instance)
        if args.tol == DEFAULT_TOL and "tol" in inst.task:
            args.tol = float(inst.task["tol"])
        if "seed" in inst.task and args.seed == 0:
            args.seed = int(inst.task["seed"])
        t0 = time.perf_counter()
        path_tag, results, claims = COMMANDS[args.command](args, inst, out)
        wall = time.perf_counter() - t0
        passed = all(c["passed"] for c in claims)
        report = {
            "report_version": REPORT_VERSION,
            "command": args.command,
            "instance_digest": inst.digest,
            "instance": inst.raw,
            "seed": args.seed,
            "tol": args.tol,
            "solver_path": path_tag,
            "results": results,
            "claims": claims,
            "passed": passed,
        }
        cio.emit_report(report, out)
        # wall time lives apart from the report so repeated runs stay byte-identical
        cio.write_atomic(os.path.join(out, "timing.json"),
                         cio.dumps({"command": args.command, "wall_seconds": wall}) + "\n")
        return EXIT_OK if passed else EXIT_FALSIFIED
    except CapabilityError as exc:
        print(json.dumps(_error_payload(exc)), file=sys.stderr)
        return EXIT_CAPABILITY
    except InstanceError as exc:
        print(json.dumps(_error_payload(exc)), file=sys.stderr)
        return EXIT_INSTANCE
    except SolverError as exc:
        print(json.dumps(_error_payload(exc)), file=sys.stderr)
        return EXIT_SOLVER


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
