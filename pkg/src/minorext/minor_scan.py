"""Exact extreme-eigenvalue scan over principal minors.

Subsets of size m are enumerated in colexicographic order through the
combinatorial number system, so a rank range ``[lo, hi)`` can be handed to a
worker in O(1).  Each worker runs a compiled, GIL-free kernel over its range;
per-worker results are merged in worker-index order with the colex-smallest
subset winning ties, which makes the outcome independent of the worker count.

Pruned mode skips the eigensolve when Gershgorin discs prove the subset cannot
beat the best T (and V) seen so far.  The best-so-far values live in a shared
two-slot register.  Workers race on it, but it only ever holds values that
some subset actually attains, so a stale read prunes less, never wrongly.
Ties are never pruned, which keeps the arg-sets identical to exhaustive mode.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .eigen_small import extreme_eigs
from .errors import BudgetError, CombinatorialExplosionError, NonConvergenceError, ParameterError
from .matgen import SymMatrix, as_array

EXHAUSTIVE = "exhaustive"
PRUNED = "pruned"
MODES = (EXHAUSTIVE, PRUNED)

EXACT_M = "exact_m"
UP_TO_M = "up_to_m"

INT64_MAX = 2**63 - 1

# relative slack on the Gershgorin comparisons: covers rounding in the computed
# eigenvalues so a subset is pruned only when it provably cannot win
PRUNE_SLACK = 1e-10


@dataclass(frozen=True)
class ScanResult:
    T: float
    V: float
    argmax_set: tuple
    argmin_set: tuple
    kind: str
    m: int
    subsets_visited: int
    subsets_pruned: int

    def csv_line(self) -> str:
        return ",".join([
            format(self.T, ".17g"),
            format(self.V, ".17g"),
            ";".join(map(str, self.argmax_set)),
            ";".join(map(str, self.argmin_set)),
            str(self.subsets_visited),
            str(self.subsets_pruned),
        ])


def n_subsets(p: int, m: int) -> int:
    """C(p, m), raising if it does not fit in int64."""
    count = math.comb(p, m)
    if count > INT64_MAX:
        raise CombinatorialExplosionError(p, m, count)
    return count


def _binom_table(p: int, m: int) -> np.ndarray:
    t = np.zeros((p + 1, m + 1), dtype=np.int64)
    for c in range(p + 1):
        for k in range(min(c, m) + 1):
            t[c, k] = math.comb(c, k)
    return t


def check_index_set(S, p: int) -> tuple:
    s = tuple(int(i) for i in S)
    if not s or len(s) > p:
        raise ParameterError(f"index set must have 1..{p} elements, got {len(s)}")
    if any(b <= a for a, b in zip(s, s[1:])):
        raise ParameterError(f"index set {s} is not strictly increasing")
    if s[0] < 0 or s[-1] >= p:
        raise ParameterError(f"index set {s} out of range [0, {p})")
    return s


def rank_combination(S) -> int:
    """Colex rank: sum of C(s_i, i + 1) over the sorted elements."""
    return sum(math.comb(s, i + 1) for i, s in enumerate(sorted(S)))


def unrank_combination(rank: int, p: int, m: int) -> tuple:
    """The ``rank``-th m-subset of range(p) in colex order."""
    total = n_subsets(p, m)
    if not 0 <= rank < total:
        raise ParameterError(f"rank {rank} outside [0, C({p}, {m}) = {total})")
    out = []
    c = p - 1
    for k in range(m, 0, -1):
        while math.comb(c, k) > rank:
            c -= 1
        out.append(c)
        rank -= math.comb(c, k)
        c -= 1
    return tuple(reversed(out))


def extract_minor(W, S) -> np.ndarray:
    w = as_array(W)
    s = check_index_set(S, w.shape[0])
    idx = np.array(s)
    return w[np.ix_(idx, idx)]


def gershgorin_upper(W, S) -> float:
    """max over rows of the minor of the absolute row sum; bounds lambda_1 from above."""
    sub = extract_minor(W, S)
    return float(np.max(np.sum(np.abs(sub), axis=1)))


# --- compiled kernel --------------------------------------------------------

@njit(cache=True, nogil=True)
def _unrank_into(rank, p, m, binom, s):
    c = p - 1
    for k in range(m, 0, -1):
        while binom[c, k] > rank:
            c -= 1
        s[k - 1] = c
        rank -= binom[c, k]
        c -= 1


@njit(cache=True, nogil=True)
def _scan_range(w, m, binom, lo, hi, pruned, reg):
    p = w.shape[0]
    s = np.empty(m, dtype=np.int64)
    _unrank_into(lo, p, m, binom, s)
    scratch = np.empty((m, m))
    best_t = -np.inf
    best_v = np.inf
    rank_t = -1
    rank_v = -1
    visited = 0
    n_pruned = 0
    failed = -1
    for r in range(lo, hi):
        if r > lo:
            # colex successor
            i = 0
            while i < m - 1 and s[i] + 1 == s[i + 1]:
                i += 1
            s[i] += 1
            for j in range(i):
                s[j] = j
        if pruned:
            up = -np.inf
            low = np.inf
            for a in range(m):
                ia = s[a]
                rs = 0.0
                for b in range(m):
                    if b != a:
                        rs += abs(w[ia, s[b]])
                d = w[ia, ia]
                if d + rs > up:
                    up = d + rs
                if d - rs < low:
                    low = d - rs
            cur_t = max(best_t, reg[0])
            cur_v = min(best_v, reg[1])
            skip_t = up + PRUNE_SLACK * (1.0 + abs(up)) < cur_t
            skip_v = low - PRUNE_SLACK * (1.0 + abs(low)) > cur_v
            if skip_t and skip_v:
                n_pruned += 1
                continue
        for a in range(m):
            for b in range(m):
                scratch[a, b] = w[s[a], s[b]]
        lam_hi, lam_lo, ok = extreme_eigs(scratch, m)
        if not ok and failed < 0:
            failed = r
        visited += 1
        if lam_hi > best_t:
            best_t = lam_hi
            rank_t = r
            if lam_hi > reg[0]:
                reg[0] = lam_hi
        if lam_lo < best_v:
            best_v = lam_lo
            rank_v = r
            if lam_lo < reg[1]:
                reg[1] = lam_lo
    return best_t, rank_t, best_v, rank_v, visited, n_pruned, failed


def _chunks(total: int, workers: int):
    workers = max(1, min(workers, total))
    step, extra = divmod(total, workers)
    lo = 0
    for k in range(workers):
        hi = lo + step + (1 if k < extra else 0)
        yield lo, hi
        lo = hi


def _scan_exact(w, m, mode, workers, budget, reg):
    p = w.shape[0]
    if not 1 <= m <= p:
        raise ParameterError(f"need 1 <= m <= p, got m={m}, p={p}")
    if mode not in MODES:
        raise ParameterError(f"mode must be one of {MODES}, got {mode!r}")
    if workers < 1:
        raise ParameterError(f"workers must be >= 1, got {workers}")
    total = n_subsets(p, m)
    if budget is not None and total > budget:
        raise BudgetError(total, budget)
    binom = _binom_table(p, m)
    pruned = mode == PRUNED
    ranges = list(_chunks(total, workers))
    if len(ranges) == 1:
        parts = [_scan_range(w, m, binom, 0, total, pruned, reg)]
    else:
        with ThreadPoolExecutor(max_workers=len(ranges)) as pool:
            futs = [pool.submit(_scan_range, w, m, binom, lo, hi, pruned, reg) for lo, hi in ranges]
            parts = [f.result() for f in futs]

    best_t, rank_t, best_v, rank_v = -math.inf, -1, math.inf, -1
    visited = n_pruned = 0
    for t, rt, v, rv, vis, npr, failed in parts:
        if failed >= 0:
            raise NonConvergenceError(
                f"Jacobi failed on subset {unrank_combination(failed, p, m)}",
                best_iterate=extract_minor(w, unrank_combination(failed, p, m)),
            )
        if rt >= 0 and t > best_t:
            best_t, rank_t = t, rt
        if rv >= 0 and v < best_v:
            best_v, rank_v = v, rv
        visited += vis
        n_pruned += npr
    return best_t, rank_t, best_v, rank_v, visited, n_pruned


def _prepare(W):
    w = np.ascontiguousarray(as_array(W), dtype=np.float64)
    if not isinstance(W, SymMatrix):
        SymMatrix(w)  # validates square + exact symmetry
    return w


def scan_exact_m(W, m: int, mode: str = EXHAUSTIVE, workers: int = 1,
                 budget: int | None = None) -> ScanResult:
    """T = max lambda_1 and V = min lambda_min over all minors with |S| = m."""
    w = _prepare(W)
    reg = np.array([-np.inf, np.inf])
    t, rt, v, rv, visited, n_pruned = _scan_exact(w, m, mode, workers, budget, reg)
    p = w.shape[0]
    return ScanResult(float(t), float(v), unrank_combination(rt, p, m), unrank_combination(rv, p, m),
                      EXACT_M, m, visited, n_pruned)


def scan_le_m(W, m: int, mode: str = EXHAUSTIVE, workers: int = 1,
              budget: int | None = None) -> ScanResult:
    """Extrema over all minors with 1 <= |S| <= m.

    Ties across sizes go to the smaller size.
    """
    w = _prepare(W)
    p = w.shape[0]
    if not 1 <= m <= p:
        raise ParameterError(f"need 1 <= m <= p, got m={m}, p={p}")
    total = sum(n_subsets(p, k) for k in range(1, m + 1))
    if total > INT64_MAX:
        raise CombinatorialExplosionError(p, m, total)
    if budget is not None and total > budget:
        raise BudgetError(total, budget)
    reg = np.array([-np.inf, np.inf])
    best_t, set_t, best_v, set_v = -math.inf, None, math.inf, None
    visited = n_pruned = 0
    for k in range(1, m + 1):
        t, rt, v, rv, vis, npr = _scan_exact(w, k, mode, workers, None, reg)
        if rt >= 0 and t > best_t:
            best_t, set_t = t, unrank_combination(rt, p, k)
        if rv >= 0 and v < best_v:
            best_v, set_v = v, unrank_combination(rv, p, k)
        visited += vis
        n_pruned += npr
    return ScanResult(float(best_t), float(best_v), set_t, set_v, UP_TO_M, m, visited, n_pruned)


def scan(W, m: int, le_m: bool = False, mode: str = EXHAUSTIVE, workers: int = 1,
         budget: int | None = None) -> ScanResult:
    fn = scan_le_m if le_m else scan_exact_m
    return fn(W, m, mode=mode, workers=workers, budget=budget)


__all__ = [
    "ScanResult", "scan", "scan_exact_m", "scan_le_m", "unrank_combination", "rank_combination",
    "extract_minor", "gershgorin_upper", "n_subsets",
]
