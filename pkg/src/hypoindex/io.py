"""Matrix files and JSON report encoding.

Matrix file (JSON)::

    {"name": "shift3", "n": 3,
     "entries": [[[0, 0], [1, 0], [0, 0]], ...],   # [re, im] pairs
     "kind_hint": "discrete",                      # optional
     "expect": {"m_dhc": 2}}                       # optional, used by ``suite``

A CSV file with real entries (one row per line) is accepted as well.
"""

from __future__ import annotations

import csv
import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import InputError
from .matcore import as_matrix

__all__ = ["MatrixFile", "load_matrix_file", "parse_matrix_json", "dump_matrix_file", "format_matrix_file",
           "encode_matrix", "decode_matrix", "to_jsonable", "SCHEMA_VERSION"]

SCHEMA_VERSION = "1.0"
KIND_HINTS = ("continuous", "discrete")


@dataclass
class MatrixFile:
    name: str
    matrix: np.ndarray
    kind_hint: Optional[str] = None
    expect: dict = field(default_factory=dict)

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def sha256(self):
        payload = json.dumps(encode_matrix(self.matrix), separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()

    def as_json(self):
        d = {"name": self.name, "n": self.n, "entries": encode_matrix(self.matrix)}
        if self.kind_hint:
            d["kind_hint"] = self.kind_hint
        if self.expect:
            d["expect"] = self.expect
        return d


def _clean(x):
    # -0.0 and 1e-17 noise make reports differ across platforms
    x = float(x)
    return 0.0 if x == 0.0 else x


def encode_matrix(M):
    M = np.asarray(M, dtype=complex)
    return [[[_clean(z.real), _clean(z.imag)] for z in row] for row in M]


def decode_matrix(entries, where="entries"):
    if not isinstance(entries, list) or not entries:
        raise InputError(f"{where}: expected a non-empty list of rows")
    rows = []
    for i, row in enumerate(entries):
        if not isinstance(row, list):
            raise InputError(f"{where}[{i}]: expected a list")
        out = []
        for j, z in enumerate(row):
            if isinstance(z, (int, float)) and not isinstance(z, bool):
                out.append(complex(z))
            elif (isinstance(z, list) and len(z) == 2
                  and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in z)):
                out.append(complex(z[0], z[1]))
            else:
                raise InputError(f"{where}[{i}][{j}]: expected [re, im], got {z!r}")
        rows.append(out)
    if len({len(r) for r in rows}) != 1:
        raise InputError(f"{where}: rows have different lengths")
    return as_matrix(rows, where)


def parse_matrix_json(text, source="<string>"):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: JSON parse error at line {exc.lineno}, "
                         f"column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise InputError(f"{source}: top level must be an object")
    if "entries" not in data:
        raise InputError(f"{source}: missing 'entries'")
    M = decode_matrix(data["entries"], f"{source}: entries")
    n = data.get("n", M.shape[0])
    if n != M.shape[0]:
        raise InputError(f"{source}: n={n} but entries are {M.shape[0]}x{M.shape[1]}")
    hint = data.get("kind_hint")
    if hint is not None and hint not in KIND_HINTS:
        raise InputError(f"{source}: kind_hint must be one of {KIND_HINTS}, got {hint!r}")
    expect = data.get("expect", {})
    if not isinstance(expect, dict):
        raise InputError(f"{source}: 'expect' must be an object")
    return MatrixFile(name=str(data.get("name", Path(source).stem)), matrix=M,
                      kind_hint=hint, expect=expect)


def _load_csv(path):
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise InputError(f"{path}: line {lineno}: non-numeric entry in {row!r}") from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise InputError(f"{path}: expected a rectangular table of numbers")
    return MatrixFile(name=Path(path).stem, matrix=as_matrix(rows, str(path)))


def load_matrix_file(path):
    """Read a JSON matrix file, or a real-valued CSV by extension ``.csv``."""
    path = Path(path)
    try:
        if path.suffix.lower() == ".csv":
            return _load_csv(path)
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    return parse_matrix_json(text, str(path))


_FLAT_LIST = re.compile(r"\[\s*([^\[\]{}]*?)\s*\]")
_LIST_OF_FLAT = re.compile(r"\[\s*((?:\[[^\[\]]*\],?\s*)+)\]")


def format_matrix_file(mf):
    """Indented JSON with each matrix row on one line."""
    text = json.dumps(mf.as_json(), indent=1)
    text = _FLAT_LIST.sub(lambda m: "[" + " ".join(m.group(1).split()) + "]", text)
    text = _LIST_OF_FLAT.sub(lambda m: "[" + " ".join(m.group(1).split()) + "]", text)
    return text + "\n"


def dump_matrix_file(mf, path):
    Path(path).write_text(format_matrix_file(mf))


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and complex numbers."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            if obj.ndim == 2:
                return encode_matrix(obj)
            return [[_clean(z.real), _clean(z.imag)] for z in obj.ravel()]
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(obj.real), _clean(obj.imag)]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    return obj
