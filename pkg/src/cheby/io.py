"""Instance files, report serialisation and atomic output.

Instance files are JSON::

    {
      "version": 1,
      "norm": {"kind": "max", "dim": 2},
      "constraint": {"kind": "whole"},
      "points": [[1, 0], [-1, 0]],
      "task": {"eps": 0.1}
    }

norm kinds: ``max`` (dim), ``p`` (p, dim), ``directsum`` (blocks: list of norms).
constraint kinds: ``whole``, ``affine`` (A, c), ``polytope`` (G, h, optional A, b),
``subspace_ball`` (basis, lambda; uses the instance norm), ``product`` (parts).
An optional ``msummand`` object {"y_dim": k, "Z": constraint} marks an
M-summand instance X = Y (+) W split after the first k coordinates.

Schema problems are collected, not raised one at a time; each carries a
JSON path and the line it was found on.
"""
from __future__ import annotations

import bisect
import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from json.decoder import scanstring

import numpy as np

from .domain import AffineSubspace, BlockProduct, Polytope, SubspaceBall, WholeSpace
from .errors import ChebyError, InstanceError
from .norms import DirectSum, MaxNorm, PNorm

FORMAT_VERSION = 1


@dataclass
class SchemaIssue:
    path: str
    line: int | None
    message: str

    def as_dict(self):
        return {"path": self.path, "line": self.line, "message": self.message}


class SchemaError(InstanceError):
    def __init__(self, issues: list[SchemaIssue]):
        self.issues = issues
        super().__init__("; ".join(f"{i.path} (line {i.line}): {i.message}" for i in issues))


@dataclass
class Instance:
    norm: object
    V: object
    points: np.ndarray
    task: dict = field(default_factory=dict)
    msummand: dict | None = None
    raw: dict = field(default_factory=dict)
    source: str | None = None

    @property
    def digest(self) -> str:
        return instance_digest(self.raw)


# -- locating values in the source text ------------------------------------------

def _line_map(text: str) -> dict:
    """JSON path tuple -> 1-based line of the value's first character."""
    newlines = [i for i, ch in enumerate(text) if ch == "\n"]
    dec = json.JSONDecoder()
    out = {}

    def line(i):
        return bisect.bisect_right(newlines, i - 1) + 1

    def ws(i):
        while i < len(text) and text[i] in " \t\r\n":
            i += 1
        return i

    def value(i, path):
        i = ws(i)
        out[path] = line(i)
        ch = text[i]
        if ch == "{":
            i = ws(i + 1)
            if text[i] == "}":
                return i + 1
            while True:
                i = ws(i)
                key, i = scanstring(text, i + 1)
                i = ws(i) + 1  # colon
                i = ws(value(i, path + (key,)))
                if text[i] == ",":
                    i += 1
                    continue
                return i + 1
        if ch == "[":
            i = ws(i + 1)
            if text[i] == "]":
                return i + 1
            k = 0
            while True:
                i = ws(value(i, path + (k,)))
                k += 1
                if text[i] == ",":
                    i += 1
                    continue
                return i + 1
        _, end = dec.raw_decode(text, i)
        return end

    try:
        value(0, ())
    except (IndexError, ValueError):
        pass
    return out


def _fmt_path(path) -> str:
    s = "$"
    for p in path:
        s += f"[{p}]" if isinstance(p, int) else f".{p}"
    return s


class _Checker:
    def __init__(self, lines: dict):
        self.lines = lines
        self.issues: list[SchemaIssue] = []

    def fail(self, path, message):
        # nearest located ancestor supplies the line
        p = tuple(path)
        while p and p not in self.lines:
            p = p[:-1]
        self.issues.append(SchemaIssue(_fmt_path(path), self.lines.get(p), message))

    def matrix(self, obj, path, cols=None, rows_min=0):
        try:
            M = np.array(obj, dtype=float)
        except (TypeError, ValueError):
            self.fail(path, "expected a list of equal-length numeric rows")
            return None
        if M.size == 0:
            M = M.reshape(0, cols or 0)
        if M.ndim != 2:
            self.fail(path, "expected a list of equal-length numeric rows")
            return None
        if not np.all(np.isfinite(M)):
            self.fail(path, "entries must be finite")
            return None
        if cols is not None and M.shape[0] and M.shape[1] != cols:
            self.fail(path, f"rows must have length {cols}, got {M.shape[1]}")
            return None
        if M.shape[0] < rows_min:
            self.fail(path, f"need at least {rows_min} row(s)")
            return None
        return M

    def vector(self, obj, path, size=None):
        try:
            v = np.array(obj, dtype=float)
        except (TypeError, ValueError):
            self.fail(path, "expected a list of numbers")
            return None
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            self.fail(path, "expected a list of finite numbers")
            return None
        if size is not None and v.size != size:
            self.fail(path, f"expected {size} entries, got {v.size}")
            return None
        return v

    def number(self, obj, path, positive=False):
        if isinstance(obj, bool) or not isinstance(obj, (int, float)) or not math.isfinite(obj):
            self.fail(path, "expected a finite number")
            return None
        if positive and obj <= 0:
            self.fail(path, "must be positive")
            return None
        return float(obj)

    # -- norms -----------------------------------------------------------------
    def norm(self, obj, path):
        if not isinstance(obj, dict):
            self.fail(path, "norm must be an object")
            return None
        kind = obj.get("kind")
        if kind == "max":
            d = obj.get("dim")
            if not isinstance(d, int) or isinstance(d, bool) or d < 1:
                self.fail(path + ["dim"], "dim must be a positive integer")
                return None
            return MaxNorm(d)
        if kind == "p":
            d = obj.get("dim")
            p = obj.get("p")
            ok = True
            if not isinstance(d, int) or isinstance(d, bool) or d < 1:
                self.fail(path + ["dim"], "dim must be a positive integer")
                ok = False
            if self.number(p, path + ["p"]) is None:
                ok = False
            elif not 1 < p < math.inf:
                self.fail(path + ["p"], "p must lie strictly between 1 and infinity")
                ok = False
            return PNorm(float(p), d) if ok else None
        if kind == "directsum":
            blocks = obj.get("blocks")
            if not isinstance(blocks, list) or len(blocks) < 1:
                self.fail(path + ["blocks"], "blocks must be a non-empty list of norms")
                return None
            parsed = [self.norm(b, path + ["blocks", i]) for i, b in enumerate(blocks)]
            if any(b is None for b in parsed):
                return None
            total = obj.get("dim")
            ns = DirectSum(tuple(parsed))
            if total is not None and total != ns.dim:
                self.fail(path + ["dim"], f"block dims sum to {ns.dim}, not {total}")
                return None
            return ns
        self.fail(path + ["kind"], f"unknown norm kind {kind!r}; expected max, p or directsum")
        return None

    # -- constraint sets -----------------------------------------------------------
    def constraint(self, obj, path, dim, norm):
        if obj is None:
            return WholeSpace(dim)
        if not isinstance(obj, dict):
            self.fail(path, "constraint must be an object")
            return None
        kind = obj.get("kind")
        try:
            if kind == "whole":
                return WholeSpace(dim)
            if kind == "affine":
                A = self.matrix(obj.get("A"), path + ["A"], dim, 1)
                c = None if A is None else self.vector(obj.get("c"), path + ["c"], A.shape[0])
                return None if c is None else AffineSubspace(A, c)
            if kind == "polytope":
                G = self.matrix(obj.get("G", []), path + ["G"], dim)
                h = None if G is None else self.vector(obj.get("h", []), path + ["h"], G.shape[0])
                A = self.matrix(obj.get("A", []), path + ["A"], dim)
                b = None if A is None else self.vector(obj.get("b", []), path + ["b"], A.shape[0])
                if G is None or h is None or A is None or b is None:
                    return None
                P = Polytope(G, h, A, b, dim=dim)
                if P.is_empty():
                    self.fail(path, "polytope is empty")
                    return None
                return P
            if kind == "subspace_ball":
                B = self.matrix(obj.get("basis"), path + ["basis"], dim)
                lam = self.number(obj.get("lambda"), path + ["lambda"], positive=True)
                if B is None or lam is None:
                    return None
                return SubspaceBall(B, lam, norm)
            if kind == "product":
                parts = obj.get("parts")
                if not isinstance(parts, list) or not parts:
                    self.fail(path + ["parts"], "parts must be a non-empty list")
                    return None
                blocks = norm.blocks if isinstance(norm, DirectSum) else None
                if blocks is None or len(blocks) != len(parts):
                    self.fail(path + ["parts"],
                              "a product needs a directsum norm with one block per part")
                    return None
                out = [self.constraint(p, path + ["parts", i], blocks[i].dim, blocks[i])
                       for i, p in enumerate(parts)]
                return None if any(o is None for o in out) else BlockProduct(out)
        except ChebyError as exc:
            self.fail(path, str(exc))
            return None
        self.fail(path + ["kind"], f"unknown constraint kind {kind!r}")
        return None


_TASK_NUMBERS = {"eps", "alpha", "lambda", "tol", "grid_h", "eps0"}
_TASK_INTS = {"seed", "trials", "jobs"}


def _check_task(ck: _Checker, task, path):
    if task is None:
        return {}
    if not isinstance(task, dict):
        ck.fail(path, "task must be an object")
        return {}
    for k, v in task.items():
        if k in _TASK_NUMBERS:
            ck.number(v, path + [k], positive=(k != "alpha"))
        elif k in _TASK_INTS and (not isinstance(v, int) or isinstance(v, bool)):
            ck.fail(path + [k], "expected an integer")
    return task


def build_instance(raw, lines: dict | None = None, source: str | None = None) -> Instance:
    ck = _Checker(lines or {})
    if not isinstance(raw, dict):
        ck.fail([], "instance must be a JSON object")
        raise SchemaError(ck.issues)
    if raw.get("version") != FORMAT_VERSION:
        ck.fail(["version"], f"version field must be {FORMAT_VERSION}")
    norm = ck.norm(raw.get("norm"), ["norm"]) if "norm" in raw else None
    if "norm" not in raw:
        ck.fail(["norm"], "missing norm")
    pts = None
    if "points" not in raw:
        ck.fail(["points"], "missing points")
    elif norm is not None:
        pts = ck.matrix(raw["points"], ["points"], norm.dim, 1)
    V = ck.constraint(raw.get("constraint"), ["constraint"], norm.dim, norm) if norm else None
    task = _check_task(ck, raw.get("task"), ["task"])
    ms = raw.get("msummand")
    msd = None
    if ms is not None and norm is not None:
        k = ms.get("y_dim") if isinstance(ms, dict) else None
        if not isinstance(k, int) or not 0 < k < norm.dim:
            ck.fail(["msummand", "y_dim"], f"y_dim must be an integer in [1, {norm.dim - 1}]")
        elif not isinstance(norm, DirectSum) or norm.blocks[0].dim != k:
            ck.fail(["msummand", "y_dim"], "msummand needs a 2-block directsum norm split at y_dim")
        else:
            Z = ck.constraint(ms.get("Z"), ["msummand", "Z"], k, norm.blocks[0])
            if Z is not None:
                msd = {"y_dim": k, "Z": Z}
    if ck.issues:
        raise SchemaError(ck.issues)
    return Instance(norm, V, pts, task, msd, raw, source)


def parse_instance(path: str) -> Instance:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InstanceError(f"cannot read instance file {path}: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError([SchemaIssue("$", exc.lineno, f"invalid JSON: {exc.msg}")]) from exc
    return build_instance(raw, _line_map(text), path)


def parse_instance_text(text: str) -> Instance:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError([SchemaIssue("$", exc.lineno, f"invalid JSON: {exc.msg}")]) from exc
    return build_instance(raw, _line_map(text))


# -- instance construction helpers ---------------------------------------------

def norm_to_json(norm) -> dict:
    if isinstance(norm, MaxNorm):
        return {"kind": "max", "dim": norm.dim}
    if isinstance(norm, PNorm):
        return {"kind": "p", "p": norm.p, "dim": norm.dim}
    return {"kind": "directsum", "blocks": [norm_to_json(b) for b in norm.blocks]}


def constraint_to_json(V) -> dict:
    if isinstance(V, WholeSpace):
        return {"kind": "whole"}
    if isinstance(V, AffineSubspace):
        return {"kind": "affine", "A": V.A.tolist(), "c": V.c.tolist()}
    if isinstance(V, Polytope):
        out = {"kind": "polytope", "G": V.G.tolist(), "h": V.h.tolist()}
        if V.A.shape[0]:
            out.update(A=V.A.tolist(), b=V.b.tolist())
        return out
    if isinstance(V, SubspaceBall):
        return {"kind": "subspace_ball", "basis": V.basis.tolist(), "lambda": V.lam}
    if isinstance(V, BlockProduct):
        return {"kind": "product", "parts": [constraint_to_json(p) for p in V.parts]}
    raise InstanceError(f"cannot serialise {type(V).__name__}")


def instance_json(norm, V, points, task=None) -> dict:
    out = {"version": FORMAT_VERSION, "norm": norm_to_json(norm),
           "constraint": constraint_to_json(V), "points": np.asarray(points, float).tolist()}
    if task:
        out["task"] = task
    return out


# -- deterministic output ----------------------------------------------------------

def fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = "%.17g" % x
    if "." not in s and "e" not in s and "n" not in s:
        s += ".0"
    return s


def _plain(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj, indent: int = 0) -> str:
    """JSON with insertion-ordered keys and 17-significant-digit floats."""
    obj = _plain(obj)
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        flat = [_plain(v) for v in obj]
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in flat):
            return "[" + ", ".join(dumps(v) for v in flat) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in flat) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def instance_digest(raw: dict) -> str:
    return "sha256:" + hashlib.sha256(canonical(raw).encode()).hexdigest()


def write_atomic(path: str, data: str):
    """Write via a temporary file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"writing {path}: {exc.strerror or exc}") from exc


def csv_text(header: str, rows) -> str:
    lines = [header]
    for row in rows:
        cells = []
        for v in row:
            v = _plain(v)
            if isinstance(v, float):
                cells.append(fmt_float(v) if math.isfinite(v) else "nan")
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def emit_report(report: dict, out_dir: str, name: str = "report.json") -> str:
    path = os.path.join(out_dir, name)
    write_atomic(path, dumps(report) + "\n")
    return path


def emit_csv(out_dir: str, name: str, header: str, rows) -> str:
    path = os.path.join(out_dir, name)
    write_atomic(path, csv_text(header, rows))
    return path
