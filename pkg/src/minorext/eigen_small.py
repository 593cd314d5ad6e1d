"""Eigenvalues of small dense symmetric matrices.

Cyclic Jacobi (compiled with numba) is the workhorse; closed forms for
m <= 3 serve as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import NonConvergenceError, ParameterError
from .matgen import as_array

MAX_SWEEPS = 50
OFF_TOL = 1e-12


@dataclass(frozen=True)
class SpectralSummary:
    eigenvalues: np.ndarray  # descending
    iterations: int
    converged: bool

    @property
    def largest(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def smallest(self) -> float:
        return float(self.eigenvalues[-1])


@njit(cache=True, nogil=True)
def _offdiag_sq(a, m):
    s = 0.0
    for i in range(m):
        for j in range(i + 1, m):
            s += a[i, j] * a[i, j]
    return 2.0 * s


@njit(cache=True, nogil=True)
def jacobi_inplace(a, m, max_sweeps, rel_tol):
    """Diagonalize the leading m x m block of ``a`` in place.

    Returns (sweeps, converged); eigenvalues are left on the diagonal,
    unsorted.
    """
    frob_sq = 0.0
    for i in range(m):
        for j in range(m):
            frob_sq += a[i, j] * a[i, j]
    thresh_sq = rel_tol * rel_tol * frob_sq
    for sweep in range(max_sweeps):
        if _offdiag_sq(a, m) <= thresh_sq:
            return sweep, True
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                theta = (aqq - app) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for r in range(m):
                    if r != p and r != q:
                        arp = a[r, p]
                        arq = a[r, q]
                        vp = c * arp - s * arq
                        vq = s * arp + c * arq
                        a[r, p] = vp
                        a[p, r] = vp
                        a[r, q] = vq
                        a[q, r] = vq
    return max_sweeps, _offdiag_sq(a, m) <= thresh_sq


@njit(cache=True, nogil=True)
def extreme_eigs(a, m):
    """(largest, smallest, converged) for the leading m x m block; destroys ``a``."""
    _, ok = jacobi_inplace(a, m, MAX_SWEEPS, OFF_TOL)
    hi = a[0, 0]
    lo = a[0, 0]
    for i in range(1, m):
        d = a[i, i]
        if d > hi:
            hi = d
        if d < lo:
            lo = d
    return hi, lo, ok


def _check_square(a, m):
    if m is None:
        m = a.shape[0]
    if a.ndim != 2 or a.shape != (m, m) or m < 1:
        raise ParameterError(f"expected an {m}x{m} matrix, got shape {a.shape}")
    if not np.array_equal(a, a.T):
        raise ParameterError("matrix is not exactly symmetric")
    return m


def sym_eigs(M, m: int | None = None) -> SpectralSummary:
    """All eigenvalues of a symmetric matrix by cyclic Jacobi, sorted descending."""
    a = np.array(as_array(M), dtype=np.float64, order="C")
    m = _check_square(a, m)
    sweeps, ok = jacobi_inplace(a, m, MAX_SWEEPS, OFF_TOL)
    if not ok:
        raise NonConvergenceError(f"Jacobi did not converge in {MAX_SWEEPS} sweeps", best_iterate=a)
    ev = np.sort(np.diagonal(a))[::-1].copy()
    return SpectralSummary(ev, int(sweeps), True)


def eigs_closed_form(M, m: int | None = None) -> SpectralSummary:
    """Closed-form eigenvalues for m in {1, 2, 3}."""
    a = np.asarray(as_array(M), dtype=np.float64)
    m = _check_square(a, m) if a.ndim == 2 else m
    if m > 3:
        raise ParameterError(f"closed form supports m <= 3, got m={m}")
    if m == 1:
        ev = [a[0, 0]]
    elif m == 2:
        x, b, d = a[0, 0], a[0, 1], a[1, 1]
        mid = 0.5 * (x + d)
        rad = math.hypot(0.5 * (x - d), b)
        ev = [mid + rad, mid - rad]
    else:
        ev = _cardano_sym3(a)
    return SpectralSummary(np.array(sorted(ev, reverse=True)), 0, True)


def _cardano_sym3(a):
    # trigonometric solution of the depressed characteristic cubic
    p1 = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
    q = np.trace(a) / 3.0
    if p1 == 0.0:
        return [a[0, 0], a[1, 1], a[2, 2]]
    p2 = (a[0, 0] - q) ** 2 + (a[1, 1] - q) ** 2 + (a[2, 2] - q) ** 2 + 2.0 * p1
    p = math.sqrt(p2 / 6.0)
    b = (a - q * np.eye(3)) / p
    det = (b[0, 0] * (b[1, 1] * b[2, 2] - b[1, 2] * b[2, 1])
           - b[0, 1] * (b[1, 0] * b[2, 2] - b[1, 2] * b[2, 0])
           + b[0, 2] * (b[1, 0] * b[2, 1] - b[1, 1] * b[2, 0]))
    r = det / 2.0
    r = min(1.0, max(-1.0, r))
    phi = math.acos(r) / 3.0
    e1 = q + 2.0 * p * math.cos(phi)
    e3 = q + 2.0 * p * math.cos(phi + 2.0 * math.pi / 3.0)
    e2 = 3.0 * q - e1 - e3
    return [e1, e2, e3]


def spectral_norm(M, m: int | None = None) -> float:
    ev = sym_eigs(M, m).eigenvalues
    return float(max(abs(ev[0]), abs(ev[-1])))
