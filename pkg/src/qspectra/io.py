"""JSON persistence with a canonical, byte-stable layout.

Keys are sorted and floats are written with 17 significant digits, so
``save(load(path))`` reproduces the file exactly once it is in canonical form.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Iterable, Union

import numpy as np

from .errors import ParseError
from .qlinalg import QMatrix, SpectrumResult

PathLike = Union[str, Path]


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    if x == 0.0:
        return "0.0" if math.copysign(1.0, x) > 0 else "-0.0"
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def dumps(obj: Any, indent: int = 1, _level: int = 0) -> str:
    """Canonical JSON text (sorted keys, 17-digit floats, nested lists of numbers kept inline)."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(obj[k], indent, _level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict,)) for v in _flatten(obj)):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _flatten(seq: Iterable) -> Iterable:
    for v in seq:
        if isinstance(v, (list, tuple)):
            yield from _flatten(v)
        else:
            yield v


def save(obj: Any, path: PathLike) -> None:
    if hasattr(obj, "to_json"):
        obj = obj.to_json()
    Path(path).write_text(dumps(obj) + "\n")


def _read_json(path: PathLike) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def matrix_from_json(obj: Any, source: str = "<json>") -> QMatrix:
    if not isinstance(obj, dict) or "entries" not in obj:
        raise ParseError(f"{source}: expected an object with an 'entries' field")
    rows = obj["entries"]
    if not isinstance(rows, list):
        raise ParseError(f"{source}: 'entries' must be a list of rows")
    n = len(rows)
    if "n" in obj and obj["n"] != n:
        raise ParseError(f"{source}: 'n' = {obj['n']} but 'entries' has {n} rows")
    data = np.zeros((n, n, 4))
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            got = len(row) if isinstance(row, list) else type(row).__name__
            raise ParseError(f"{source}: entries[{i}] has {got} entries, expected {n} (grid must be square)")
        for j, e in enumerate(row):
            if not isinstance(e, list) or len(e) != 4:
                got = len(e) if isinstance(e, list) else type(e).__name__
                raise ParseError(f"{source}: entries[{i}][{j}] must be [w, x, y, z], got {got} components")
            try:
                data[i, j] = [float(c) for c in e]
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{source}: entries[{i}][{j}] is not numeric") from exc
    return QMatrix(data)


def load_matrix(path: PathLike) -> QMatrix:
    return matrix_from_json(_read_json(path), str(path))


def load_spectrum(path: PathLike) -> SpectrumResult:
    obj = _read_json(path)
    try:
        return SpectrumResult.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: not a spectrum file ({exc})") from exc


def spectrum_csv(spec: SpectrumResult) -> str:
    """Plot data: one ``re,rho,mult`` row per sphere."""
    lines = ["re,rho,mult"]
    lines += [f"{_fmt_float(s.re)},{_fmt_float(s.rho)},{m}" for s, m in spec.spheres]
    return "\n".join(lines) + "\n"
