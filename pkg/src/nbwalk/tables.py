"""CSV files with a single ``#``-prefixed JSON metadata line."""
from __future__ import annotations

import csv
import json
import math
from numbers import Integral, Real


def fmt(x) -> str:
    """Full-precision text for numbers (17 significant digits)."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, Integral):
        return str(int(x))
    if isinstance(x, Real):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def write_table(path, columns, rows, meta: dict | None = None, mode: str = "w") -> None:
    with open(path, mode, newline="") as fh:
        if mode == "w":
            if meta is not None:
                fh.write("# " + json.dumps(meta, sort_keys=True, default=_jsonable) + "\n")
            csv.writer(fh).writerow(columns)
        w = csv.writer(fh)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_table(path):
    """Returns (meta, columns, rows) with rows as lists of strings."""
    meta = None
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    if lines and lines[0].startswith("#"):
        meta = json.loads(lines[0][1:])
        lines = lines[1:]
    reader = list(csv.reader(lines))
    if not reader:
        return meta, [], []
    return meta, reader[0], reader[1:]


def _jsonable(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"cannot serialise {type(obj).__name__}")
