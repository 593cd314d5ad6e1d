"""Sample matrices, Gram and centered matrices, Wigner matrices, matrix files."""

from __future__ import annotations

import math
import re
import struct
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .distributions import EntryDistribution, SeedSpec, sample_entries
from .errors import ParameterError, ParseError, SizeError

GRAM = "gram"
CENTERED = "centered"
WIGNER = "wigner"
GENERIC = "generic"

MINX_MAGIC = b"MINX"
MINX_VERSION = 1
_MINX_HEADER = struct.Struct("<4sIQQ")


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """The n x p sample matrix (rows are samples, columns variables)."""

    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ParameterError(f"data matrix must be 2-D and non-empty, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ParameterError("data matrix has non-finite entries")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Exactly symmetric square matrix with a provenance tag."""

    values: np.ndarray
    tag: str = GENERIC

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 1:
            raise ParameterError(f"symmetric matrix must be square and non-empty, got shape {v.shape}")
        if not np.array_equal(v, v.T):
            raise ParameterError("matrix is not exactly symmetric")

    @property
    def dim(self) -> int:
        return self.values.shape[0]


def as_array(M) -> np.ndarray:
    if isinstance(M, SymMatrix):
        return M.values
    return np.ascontiguousarray(M, dtype=np.float64)


def mirror_upper(a: np.ndarray) -> np.ndarray:
    """Copy the upper triangle onto the lower one (no averaging)."""
    return np.triu(a) + np.triu(a, 1).T


def gen_data(dist: EntryDistribution, n: int, p: int, seed: SeedSpec) -> DataMatrix:
    if n < 1 or p < 1:
        raise ParameterError(f"n and p must be >= 1, got n={n}, p={p}")
    if n * p > sys.maxsize // 8:
        raise SizeError(f"n*p = {n * p} entries exceed the addressable length")
    x = sample_entries(dist, seed, n * p).reshape(n, p)
    return DataMatrix(x)


@njit(cache=True, nogil=True)
def _gram_kernel(xt):
    # xt is p x n (columns of X as contiguous rows); natural-order accumulation
    p, n = xt.shape
    w = np.empty((p, p))
    for i in range(p):
        for j in range(i, p):
            s = 0.0
            for t in range(n):
                s += xt[i, t] * xt[j, t]
            w[i, j] = s
            w[j, i] = s
    return w


def gram(X) -> SymMatrix:
    """W = X^T X with one fixed summation order per cell."""
    x = X.values if isinstance(X, DataMatrix) else np.asarray(X, dtype=np.float64)
    xt = np.ascontiguousarray(x.T, dtype=np.float64)
    return SymMatrix(_gram_kernel(xt), GRAM)


def center_scale(W, n: int) -> SymMatrix:
    """A = (W - n I) / sqrt(n)."""
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    w = as_array(W)
    a = w.copy()
    np.fill_diagonal(a, np.diagonal(w) - n)
    a /= math.sqrt(n)
    return SymMatrix(a, CENTERED)


def gen_wigner(p: int, eta: float, seed: SeedSpec) -> SymMatrix:
    """Symmetric Gaussian matrix: diagonal N(0, eta), strict upper N(0, 1).

    The stream supplies the p diagonal draws first, then the strict upper
    triangle in row-major order.
    """
    if p < 1:
        raise ParameterError(f"p must be >= 1, got {p}")
    if not eta > 0:
        raise ParameterError(f"eta must be > 0, got {eta}")
    rng = seed.generator()
    diag = rng.standard_normal(p) * math.sqrt(eta)
    iu = np.triu_indices(p, 1)
    w = np.zeros((p, p))
    w[iu] = rng.standard_normal(len(iu[0]))
    w = w + w.T
    w[np.diag_indices(p)] = diag
    return SymMatrix(w, WIGNER)


# --- files -------------------------------------------------------------------

def write_minx(path, a) -> None:
    a = np.ascontiguousarray(a, dtype="<f8")
    if a.ndim != 2:
        raise ParameterError("MINX holds 2-D matrices only")
    rows, cols = a.shape
    with open(path, "wb") as fh:
        fh.write(_MINX_HEADER.pack(MINX_MAGIC, MINX_VERSION, rows, cols))
        fh.write(a.tobytes(order="C"))


def _read_minx(raw: bytes) -> np.ndarray:
    if len(raw) < _MINX_HEADER.size:
        raise ParseError("MINX file truncated in header")
    magic, version, rows, cols = _MINX_HEADER.unpack_from(raw)
    if version != MINX_VERSION:
        raise ParseError(f"unsupported MINX version {version}")
    expected = _MINX_HEADER.size + 8 * rows * cols
    if len(raw) != expected:
        raise ParseError(f"MINX payload has {len(raw)} bytes, expected {expected}")
    a = np.frombuffer(raw, dtype="<f8", offset=_MINX_HEADER.size).reshape(rows, cols)
    return a.astype(np.float64)


_SPLIT = re.compile(r"[,\s]+")


def _read_text(text: str) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(tok) for tok in _SPLIT.split(line) if tok])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from None
    if not rows:
        raise ParseError("no numeric rows found")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ParseError("rows have differing numbers of columns")
    return np.array(rows, dtype=np.float64)


def read_matrix(path) -> np.ndarray:
    """Load a MINX binary or delimited-text matrix."""
    raw = Path(path).read_bytes()
    if raw[:4] == MINX_MAGIC:
        a = _read_minx(raw)
    else:
        try:
            a = _read_text(raw.decode("utf-8"))
        except UnicodeDecodeError:
            raise ParseError("file is neither MINX nor UTF-8 text") from None
    if a.size == 0:
        raise ParseError("empty matrix")
    if not np.all(np.isfinite(a)):
        raise ParseError("matrix has non-finite entries")
    return a
