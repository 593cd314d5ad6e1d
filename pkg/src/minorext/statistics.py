"""Envelope constants, normalized deviations and the SRC certificate.

All logarithms are natural.  At the branch point eta = 2 the "eta <= 2"
formula is used; both branches agree there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError
from .matgen import DataMatrix, gram
from .minor_scan import EXHAUSTIVE, scan_le_m

T1_GAUSSIAN = "T1_Gaussian"
T2_ETA_LE2 = "T2_EtaLe2"
T2_ETA_GT2 = "T2_EtaGt2"
T3_WIGNER_ETA_LE2 = "T3_Wigner_EtaLe2"
T3_WIGNER_ETA_GT2 = "T3_Wigner_EtaGt2"

RATIO_OF_N = "RatioOfN"
ABSOLUTE = "Absolute"


@dataclass(frozen=True)
class EnvelopeSpec:
    theorem: str
    value: float
    scale: str


@dataclass(frozen=True)
class SrcCertificate:
    m: int
    c1: float
    c2: float


def _check(n, p, m, eta=None):
    if n is not None and n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    if p < 2:
        raise ParameterError(f"p must be >= 2 so that log p > 0, got {p}")
    if m < 1:
        raise ParameterError(f"m must be >= 1, got {m}")
    if eta is not None and not eta > 0:
        raise ParameterError(f"eta must be > 0, got {eta}")


def _width(m, eta, log_p):
    """Squared-width factor: [4(m-1) + 2 eta] log p, or 2 eta m log p above eta = 2."""
    if eta <= 2:
        return (4 * (m - 1) + 2 * eta) * log_p
    return 2 * eta * m * log_p


def envelope_gaussian(n: int, p: int, m: int) -> EnvelopeSpec:
    _check(n, p, m)
    # 2 sqrt(m log p / n), written through the general formula so that the
    # eta = 2 case of envelope_general is bitwise identical
    return EnvelopeSpec(T1_GAUSSIAN, math.sqrt(_width(m, 2.0, math.log(p)) / n), RATIO_OF_N)


def envelope_general(n: int, p: int, m: int, eta: float) -> EnvelopeSpec:
    _check(n, p, m, eta)
    theorem = T2_ETA_LE2 if eta <= 2 else T2_ETA_GT2
    return EnvelopeSpec(theorem, math.sqrt(_width(m, eta, math.log(p)) / n), RATIO_OF_N)


def envelope_wigner(p: int, m: int, eta: float) -> EnvelopeSpec:
    _check(None, p, m, eta)
    theorem = T3_WIGNER_ETA_LE2 if eta <= 2 else T3_WIGNER_ETA_GT2
    return EnvelopeSpec(theorem, math.sqrt(_width(m, eta, math.log(p))), ABSOLUTE)


def normalized_deviations(T: float, V: float, n: int, env: EnvelopeSpec):
    """(zT, zV) = ((T/n - 1)/env, (V/n - 1)/env); the envelope event is zT <= 1, zV >= -1."""
    if env.scale != RATIO_OF_N:
        raise ParameterError("normalized_deviations needs a RatioOfN envelope")
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    return (T / n - 1.0) / env.value, (V / n - 1.0) / env.value


def absolute_deviations(T: float, V: float, env: EnvelopeSpec):
    """Wigner counterpart: (T / env, V / env)."""
    if env.scale != ABSOLUTE:
        raise ParameterError("absolute_deviations needs an Absolute envelope")
    return T / env.value, V / env.value


def src_certificate(X, m: int, mode: str = EXHAUSTIVE, workers: int = 1,
                    n: int | None = None, budget: int | None = None) -> SrcCertificate:
    """Exact SRC constants over |S| <= m for Sigma_S = X_S^T X_S / n.

    ``n`` defaults to the number of rows of X.
    """
    x = X if isinstance(X, DataMatrix) else DataMatrix(X)
    n = x.n if n is None else n
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    res = scan_le_m(gram(x), m, mode=mode, workers=workers, budget=budget)
    # Gram minors are PSD; a negative V can only be rounding
    c1 = max(res.V / n, 0.0)
    return SrcCertificate(m, c1, res.T / n)
