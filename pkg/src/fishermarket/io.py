"""Line-oriented text formats for instances, candidates, configs and matrices.

All formats share one dialect: ``key=value`` header lines, blank lines and
``#`` comments ignored, floats printed with ``repr`` so that parsing
reproduces every value bit for bit.
"""

from __future__ import annotations

import os
import tempfile
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import FormatError, IoError
from .market import MarketInstance, UtilityClass
from .metrics import EquilibriumCandidate


def fmt_float(x) -> str:
    return repr(float(x))


def fmt_vector(values) -> str:
    return " ".join(fmt_float(x) for x in np.asarray(values, dtype=float).reshape(-1))


def _parse_float(token: str, where: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise FormatError(f"{where}: {token!r} is not a number") from None


def _parse_int(token: str, where: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise FormatError(f"{where}: {token!r} is not an integer") from None


def _parse_vector(text: str, where: str, length: Optional[int] = None) -> np.ndarray:
    out = np.array([_parse_float(t, where) for t in text.split()], dtype=float)
    if length is not None and out.size != length:
        raise FormatError(f"{where}: expected {length} values, got {out.size}")
    return out


def _content_lines(text: str) -> List[Tuple[int, str]]:
    lines = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            lines.append((no, line))
    return lines


def read_text(path) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def write_text_atomic(path, text: str) -> None:
    """Write via a temporary file in the same directory and rename."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


# key=value dialect


def parse_key_values(text: str) -> Dict[str, str]:
    """Parse a flat ``key=value`` file; duplicate keys are an error."""
    out: Dict[str, str] = {}
    for no, line in _content_lines(text):
        if "=" not in line:
            raise FormatError(f"line {no}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise FormatError(f"line {no}: empty key")
        if key in out:
            raise FormatError(f"line {no}: duplicate key {key!r}")
        out[key] = value
    return out


def format_key_values(items: Iterable[Tuple[str, object]], comments: Sequence[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    lines += [f"{k}={v}" for k, v in items]
    return "\n".join(lines) + "\n"


# instances


def format_instance(inst: MarketInstance, sparse: bool = False, comments: Sequence[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    lines += [
        f"n={inst.n}",
        f"m={inst.m}",
        f"utility={inst.utility_class.value}",
        f"budgets={fmt_vector(inst.budgets)}",
    ]
    if sparse:
        rows, cols, vals = inst.triplets()
        lines += ["sparse", f"nnz={rows.size}"]
        lines += [f"{i} {j} {fmt_float(x)}" for i, j, x in zip(rows, cols, vals)]
    else:
        lines.append("dense")
        lines += [fmt_vector(row) for row in inst.values]
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> MarketInstance:
    """Inverse of :func:`format_instance`. Does not run validation."""
    lines = _content_lines(text)
    header: Dict[str, str] = {}
    pos = 0
    while pos < len(lines) and "=" in lines[pos][1]:
        key, value = (s.strip() for s in lines[pos][1].split("=", 1))
        header[key] = value
        pos += 1
    for key in ("n", "m", "utility", "budgets"):
        if key not in header:
            raise FormatError(f"instance header is missing {key!r}")
    n = _parse_int(header["n"], "n")
    m = _parse_int(header["m"], "m")
    if n < 1 or m < 1:
        raise FormatError("n and m must be positive")
    utility = UtilityClass.parse(header["utility"])
    budgets = _parse_vector(header["budgets"], "budgets", n)
    if pos >= len(lines):
        raise FormatError("instance body (dense or sparse) is missing")
    no, kind = lines[pos]
    body = lines[pos + 1:]
    if kind == "dense":
        if len(body) != n:
            raise FormatError(f"dense body has {len(body)} rows, expected {n}")
        values = np.vstack([_parse_vector(line, f"line {no}", m) for no, line in body])
    elif kind == "sparse":
        if not body or not body[0][1].startswith("nnz="):
            raise FormatError("sparse body must start with nnz=<int>")
        nnz = _parse_int(body[0][1][4:], "nnz")
        entries = body[1:]
        if len(entries) != nnz:
            raise FormatError(f"sparse body has {len(entries)} entries, expected {nnz}")
        values = np.zeros((n, m))
        for no, line in entries:
            parts = line.split()
            if len(parts) != 3:
                raise FormatError(f"line {no}: expected 'i j value'")
            i, j = _parse_int(parts[0], f"line {no}"), _parse_int(parts[1], f"line {no}")
            if not (0 <= i < n and 0 <= j < m):
                raise FormatError(f"line {no}: index ({i}, {j}) out of range")
            values[i, j] = _parse_float(parts[2], f"line {no}")
    else:
        raise FormatError(f"line {no}: expected 'dense' or 'sparse', got {kind!r}")
    return MarketInstance(values, budgets, utility)


def load_instance(path) -> MarketInstance:
    return parse_instance(read_text(path))


def save_instance(path, inst: MarketInstance, sparse: bool = False, comments: Sequence[str] = ()) -> None:
    write_text_atomic(path, format_instance(inst, sparse, comments))


# candidates

_MATRIX_FIELDS = ("allocation", "bids")
_VECTOR_FIELDS = ("prices", "leftovers", "utilities")


def format_candidate(cand: EquilibriumCandidate) -> str:
    n = m = None
    for name in _MATRIX_FIELDS:
        mat = getattr(cand, name)
        if mat is not None:
            n, m = mat.shape
    m = cand.prices.size if m is None else m
    lines = [f"m={m}"] + ([f"n={n}"] if n is not None else [])
    for name in _VECTOR_FIELDS:
        vec = getattr(cand, name)
        if vec is not None:
            lines.append(f"{name}={fmt_vector(vec)}")
    for name in _MATRIX_FIELDS:
        mat = getattr(cand, name)
        if mat is not None:
            lines.append(name)
            lines += [fmt_vector(row) for row in mat]
    return "\n".join(lines) + "\n"


def parse_candidate(text: str) -> EquilibriumCandidate:
    lines = _content_lines(text)
    header: Dict[str, str] = {}
    pos = 0
    while pos < len(lines) and "=" in lines[pos][1]:
        key, value = (s.strip() for s in lines[pos][1].split("=", 1))
        header[key] = value
        pos += 1
    if "prices" not in header:
        raise FormatError("candidate has no prices")
    m = _parse_int(header["m"], "m") if "m" in header else None
    fields = {"prices": _parse_vector(header["prices"], "prices", m)}
    m = fields["prices"].size
    n = _parse_int(header["n"], "n") if "n" in header else None
    for name in ("leftovers", "utilities"):
        if name in header:
            fields[name] = _parse_vector(header[name], name, n)
    while pos < len(lines):
        no, name = lines[pos]
        if name not in _MATRIX_FIELDS:
            raise FormatError(f"line {no}: unknown section {name!r}")
        if n is None:
            raise FormatError("candidate with matrices needs n=<int>")
        rows = lines[pos + 1: pos + 1 + n]
        if len(rows) != n:
            raise FormatError(f"section {name!r} has fewer than {n} rows")
        fields[name] = np.vstack([_parse_vector(line, f"line {k}", m) for k, line in rows])
        pos += 1 + n
    return EquilibriumCandidate(**fields)


def load_candidate(path) -> EquilibriumCandidate:
    return parse_candidate(read_text(path))


def save_candidate(path, cand: EquilibriumCandidate) -> None:
    write_text_atomic(path, format_candidate(cand))


# dense matrices


def parse_matrix(text: str) -> np.ndarray:
    """Rows of whitespace-separated numbers."""
    rows = [_parse_vector(line, f"line {no}") for no, line in _content_lines(text)]
    if not rows:
        raise FormatError("matrix file is empty")
    if len({r.size for r in rows}) != 1:
        raise FormatError("matrix rows have different lengths")
    return np.vstack(rows)


def load_matrix(path) -> np.ndarray:
    return parse_matrix(read_text(path))
