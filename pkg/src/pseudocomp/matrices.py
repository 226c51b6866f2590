"""Matrix files and generator strings.

Files are JSON ``{"nrows", "ncols", "entries": [[re, im], ...]}`` (row
major) or CSV with one row per line and ``re+imj`` tokens. Generator
strings: ``jordan:n``, ``ginibre:n:seed``, ``diag:z1,z2,...``,
``haar-unitary:n:seed``.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .rand_frames import RngStream, complex_gaussian, haar_unitary


class MatrixParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


class GeneratorSpecError(ValueError):
    """Malformed generator string."""


def parse_complex(token: str) -> complex:
    tok = token.strip().replace(" ", "")
    if tok.endswith("i"):
        tok = tok[:-1] + "j"
    return complex(tok)


def jordan(n: int) -> np.ndarray:
    """Nilpotent Jordan block: ones on the superdiagonal."""
    return np.eye(n, k=1, dtype=complex)


def ginibre(n: int, seed: int) -> np.ndarray:
    """Complex Ginibre matrix with entry variance 1/n (spectrum near the unit disk)."""
    gen = RngStream(seed, stream_id=0x61).generator()
    return complex_gaussian(gen, (n, n)) / np.sqrt(n)


def from_generator(spec: str) -> np.ndarray:
    kind, _, rest = spec.partition(":")
    try:
        if kind == "jordan":
            return jordan(int(rest))
        if kind == "ginibre":
            n, seed = rest.split(":")
            return ginibre(int(n), int(seed))
        if kind == "diag":
            vals = [parse_complex(t) for t in rest.split(",") if t.strip()]
            if not vals:
                raise ValueError("empty diagonal")
            return np.diag(np.array(vals, dtype=complex))
        if kind == "haar-unitary":
            n, seed = rest.split(":")
            return haar_unitary(int(n), RngStream(int(seed), stream_id=0x48))
    except ValueError as exc:
        raise GeneratorSpecError(f"bad generator string {spec!r}: {exc}") from exc
    raise GeneratorSpecError(f"unknown generator {kind!r} in {spec!r}")


def is_generator(source: str) -> bool:
    return source.split(":", 1)[0] in {"jordan", "ginibre", "diag", "haar-unitary"}


def _parse_json(text: str) -> np.ndarray:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixParseError(exc.msg, exc.lineno) from exc
    try:
        nr, nc = int(obj["nrows"]), int(obj["ncols"])
        entries = obj["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MatrixParseError(f"missing or bad field: {exc}") from exc
    if len(entries) != nr * nc:
        raise MatrixParseError(f"expected {nr * nc} entries, got {len(entries)}")
    vals = np.empty(nr * nc, dtype=complex)
    for i, e in enumerate(entries):
        try:
            re, im = e
            vals[i] = complex(float(re), float(im))
        except (TypeError, ValueError) as exc:
            raise MatrixParseError(f"entry {i}: {exc}") from exc
    return vals.reshape(nr, nc)


def _parse_csv(text: str) -> np.ndarray:
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or row[0].lstrip().startswith("#"):
            continue
        try:
            rows.append([parse_complex(tok) for tok in row])
        except ValueError as exc:
            raise MatrixParseError(str(exc), lineno) from exc
        if len(rows[-1]) != len(rows[0]):
            raise MatrixParseError(
                f"row has {len(rows[-1])} entries, expected {len(rows[0])}", lineno
            )
    if not rows:
        raise MatrixParseError("no matrix rows found")
    return np.array(rows, dtype=complex)


def load_matrix(path) -> np.ndarray:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        m = _parse_json(text)
    else:
        m = _parse_csv(text)
    if not np.all(np.isfinite(m)):
        raise MatrixParseError("non-finite entries")
    return m


def resolve_matrix(source: str) -> np.ndarray:
    """A generator string or a path to a matrix file."""
    if is_generator(source):
        return from_generator(source)
    if ":" in source and not Path(source).exists():
        raise GeneratorSpecError(f"unknown generator or missing file {source!r}")
    return load_matrix(source)


def dump_json(M) -> str:
    M = np.asarray(M, dtype=complex)
    entries = [[float(z.real), float(z.imag)] for z in M.ravel()]
    return json.dumps({"nrows": M.shape[0], "ncols": M.shape[1], "entries": entries})


def dump_csv(M) -> str:
    M = np.asarray(M, dtype=complex)
    lines = [",".join(f"{float(z.real)!r}{float(z.imag):+.17g}j" for z in row) for row in M]
    return "\n".join(lines) + "\n"
