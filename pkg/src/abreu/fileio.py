"""File formats: polygon and solution JSON, field-grid CSV, A expressions.

Floats are written with ``repr`` (shortest round-trip form), so loading a
saved file reproduces every number bit for bit.  All writes go through a
temporary file in the target directory followed by an atomic rename.
"""

from __future__ import annotations

import ast
import csv
import io
import json
import math
import os
from pathlib import Path
import tempfile

import numpy as np

from .calculus import curvature_tensors, hessian_package
from .errors import InputError
from .polytope import Polygon
from .potential import SymplecticPotential, interior_grid

SOLUTION_FORMAT = "abreu-solution"
GRID_COLUMNS = ("x", "y", "d", "u", "ux", "uy", "uxx", "uxy", "uyy", "detH", "L", "S",
                "v1", "v2", "normF2", "normG2")
GRID_DECIMALS = 12


# -- atomic output --------------------------------------------------------


def atomic_write_text(path, text):
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    try:
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}", "writable_path") from None
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def dumps(data):
    """Deterministic JSON: sorted keys, repr floats, non-finite values as null."""
    return json.dumps(_finite(data), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _finite(obj):
    if isinstance(obj, dict):
        return {str(k): _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _finite(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path, data):
    atomic_write_text(path, dumps(data))


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}", "readable_path") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc.msg} (line {exc.lineno})", "json") from None


# -- A expressions ----------------------------------------------------------

_FUNCS = {name: getattr(np, name) for name in
          ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh", "sinh", "cosh", "arctan")}
_CONSTS = {"pi": math.pi, "e": math.e}
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
           ast.Div: np.divide, ast.Pow: np.power}
_UNOPS = {ast.UAdd: np.positive, ast.USub: np.negative}


class AExpression:
    """A(x, y) parsed from text; only arithmetic, x, y, pi, e and a few
    elementary functions are admitted."""

    def __init__(self, text):
        self.text = str(text).strip()
        try:
            tree = ast.parse(self.text, mode="eval")
        except SyntaxError:
            raise InputError(f"cannot parse A expression {text!r}", "A_expression") from None
        self._check(tree.body)
        self._tree = tree.body
        self.is_constant = not any(isinstance(n, ast.Name) and n.id in ("x", "y") for n in ast.walk(tree))

    def _check(self, node):
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            self._check(node.operand)
        elif isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            pass
        elif isinstance(node, ast.Name) and node.id in ("x", "y", *_CONSTS):
            pass
        elif (isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS
              and len(node.args) == 1 and not node.keywords):
            self._check(node.args[0])
        else:
            raise InputError(f"A expression {self.text!r} uses a disallowed construct", "A_expression")

    def _eval(self, node, env):
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, env), self._eval(node.right, env))
        if isinstance(node, ast.UnaryOp):
            return _UNOPS[type(node.op)](self._eval(node.operand, env))
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return env[node.id]
        return _FUNCS[node.func.id](self._eval(node.args[0], env))

    def __call__(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        with np.errstate(all="ignore"):
            out = self._eval(self._tree, {"x": x, "y": y, **_CONSTS})
        return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast(x, y).shape)

    def __repr__(self):
        return f"AExpression({self.text!r})"


def parse_A(value):
    """A number stays a float; anything else becomes an AExpression
    (a constant expression such as ``"2*pi"`` is folded to a float)."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    expr = AExpression(value)
    if expr.is_constant:
        v = float(expr(0.0, 0.0))
        if not math.isfinite(v):
            raise InputError(f"A expression {value!r} is not finite", "A_expression")
        return v
    return expr


def A_to_json(A):
    if isinstance(A, str):
        A = parse_A(A)
    if isinstance(A, AExpression):
        return A.text
    if callable(A):
        raise InputError("only constants and parsed expressions can be saved", "A_expression")
    return float(A)


# -- polygons and solutions -------------------------------------------------


def load_polygon(path):
    data = read_json(path)
    if not isinstance(data, dict):
        raise InputError("polygon file must hold a JSON object", "fields")
    return Polygon.from_dict(data)


def save_polygon(path, poly):
    write_json(path, poly.to_dict())


def solution_to_dict(pot, A, meta=None):
    return {
        "format": SOLUTION_FORMAT,
        "polygon": pot.polygon.to_dict(),
        "correction_degree": pot.degree,
        "coefficients": pot.coefficients.tolist(),
        "affine_shift": pot.affine_shift.tolist(),
        "A": A_to_json(A),
        "solver": dict(meta or {}),
    }


def solution_from_dict(data):
    """(potential, A, solver metadata); every structural problem is an InputError."""
    if not isinstance(data, dict):
        raise InputError("solution file must hold a JSON object", "fields")
    missing = [k for k in ("polygon", "correction_degree", "coefficients", "affine_shift", "A") if k not in data]
    if missing:
        raise InputError(f"solution is missing fields {missing}", "fields")
    poly = Polygon.from_dict(data["polygon"])
    try:
        m = int(data["correction_degree"])
        coef = np.array(data["coefficients"], dtype=float)
        shift = np.array(data["affine_shift"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"malformed solution arrays: {exc}", "shape") from None
    if m < 0 or coef.shape != (m + 1, m + 1):
        raise InputError("coefficients do not match correction_degree", "shape")
    if shift.shape != (3,):
        raise InputError("affine_shift must have three entries", "shape")
    if not (np.all(np.isfinite(coef)) and np.all(np.isfinite(shift))):
        raise InputError("solution contains non-finite numbers", "finite")
    pot = SymplecticPotential(poly, coef, shift)
    return pot, parse_A(data["A"]), data.get("solver", {})


def save_solution(path, pot, A, meta=None):
    write_json(path, solution_to_dict(pot, A, meta))


def load_solution(path):
    return solution_from_dict(read_json(path))


# -- field grids --------------------------------------------------------------


def grid_table(pot, n, d_min=None):
    """Rows of GRID_COLUMNS on the n x n interior grid, lexicographic in (x, y)."""
    if int(n) != n or n < 1:
        raise InputError("grid size must be a positive integer", "grid_size")
    poly = pot.polygon
    d_min = 1e-3 * poly.diameter if d_min is None else d_min
    pts = interior_grid(poly, int(n), d_min)
    jet = pot.jet(pts)
    st = hessian_package(jet)
    pack = curvature_tensors(st)
    cols = [pts[:, 0], pts[:, 1], poly.distance(pts), jet.value, jet.grad[:, 0], jet.grad[:, 1],
            jet.hess[:, 0, 0], jet.hess[:, 0, 1], jet.hess[:, 1, 1], st.det_hess, st.L, st.S,
            st.v[:, 0], st.v[:, 1], pack.normF2, pack.normG2]
    return np.stack(cols, axis=1)


def format_number(v, decimals=GRID_DECIMALS):
    s = f"{v:.{decimals}f}"
    # avoid "-0.000..." for values that round to zero
    return s[1:] if s.startswith("-") and float(s) == 0 else s


def table_csv(columns, rows, decimals=GRID_DECIMALS):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_number(float(v), decimals) for v in row])
    return buf.getvalue()


def write_grid(path, pot, n, d_min=None):
    rows = grid_table(pot, n, d_min)
    atomic_write_text(path, table_csv(GRID_COLUMNS, rows))
    return rows
