"""Numerical checks behind the proofs: quadratic-form reduction, the
epsilon-net bound on the spectral norm, and moderate-deviation tail rates."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distributions import EntryDistribution, SeedSpec, draw
from .eigen_small import spectral_norm
from .errors import ConstructionError, DegenerateEstimateError, ParameterError

EPS_MAX = math.sqrt(2.0 - math.sqrt(3.0))
UNIT_TOL = 1e-12

GAUSSIAN_CHISQ_CENTERED = "gaussian_chisq_centered"


# --- quadratic form -----------------------------------------------------------

def check_unit(u) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if u.ndim != 1 or u.size < 1:
        raise ParameterError("unit vector must be a non-empty 1-D array")
    if abs(np.linalg.norm(u) - 1.0) > UNIT_TOL:
        raise ParameterError(f"vector has norm {np.linalg.norm(u)!r}, not 1")
    return u


def uniform_unit(m: int) -> np.ndarray:
    return np.full(m, 1.0 / math.sqrt(m))


def quadform_xi(u, x):
    """(sum_i u_i x_i)^2 - 1; ``x`` may be one row or an (N, m) block of rows."""
    u = check_unit(u)
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != u.size:
        raise ParameterError(f"row length {x.shape[-1]} does not match vector length {u.size}")
    return (x @ u) ** 2 - 1.0


def xi_variance(u, eta: float) -> float:
    """Var of the quadratic form for entries with Var(x^2) = eta: (eta - 2) sum u^4 + 2."""
    if not eta > 0:
        raise ParameterError(f"eta must be > 0, got {eta}")
    u = check_unit(u)
    return (eta - 2.0) * float(np.sum(u**4)) + 2.0


def xi_sample_variance(dist: EntryDistribution, u, count: int, seed: SeedSpec):
    """Sample variance of xi over ``count`` i.i.d. rows, with its standard error."""
    u = check_unit(u)
    rows = draw(dist, seed.generator(), count * u.size).reshape(count, u.size)
    xi = quadform_xi(u, rows)
    dev2 = (xi - xi.mean()) ** 2
    var = float(dev2.sum() / (count - 1))
    se = float(dev2.std(ddof=1) / math.sqrt(count))
    return var, se


# --- epsilon nets ----------------------------------------------------------------

@dataclass(frozen=True)
class NetCheckReport:
    m: int
    epsilon: float
    net_size: int
    size_bound: float
    factor: float
    sup_quadform: float
    bound: float
    true_norm: float
    holds: bool


def _check_eps(epsilon):
    if not 0.0 < epsilon < EPS_MAX:
        raise ParameterError(f"epsilon must lie in (0, {EPS_MAX:.7f}), got {epsilon}")


def net_factor(epsilon: float) -> float:
    _check_eps(epsilon)
    return 1.0 / (1.0 - math.sqrt(epsilon**2 * (4.0 - epsilon**2)))


def net_size_bound(m: int, epsilon: float) -> float:
    return (1.0 + 2.0 / epsilon) ** m


def random_unit_vectors(m: int, count: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((count, m))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def random_symmetric(m: int, rng: np.random.Generator) -> np.ndarray:
    """Gaussian m x m matrix with the upper triangle mirrored down."""
    g = rng.standard_normal((m, m))
    return np.triu(g) + np.triu(g, 1).T


def circle_net(k: int) -> np.ndarray:
    """k equally spaced points on the unit circle."""
    theta = 2.0 * math.pi * np.arange(k) / k
    return np.column_stack([np.cos(theta), np.sin(theta)])


def covering_radius_mc(net: np.ndarray, count: int, rng: np.random.Generator,
                       chunk: int = 10_000) -> float:
    """Largest distance from ``count`` random directions to their nearest net point."""
    worst = 0.0
    m = net.shape[1]
    left = count
    while left > 0:
        k = min(chunk, left)
        pts = random_unit_vectors(m, k, rng)
        best_dot = np.max(pts @ net.T, axis=1)
        worst = max(worst, float(np.sqrt(max(0.0, 2.0 - 2.0 * best_dot.min()))))
        left -= k
    return worst


def _farthest_point(cands: np.ndarray, radius: float) -> np.ndarray:
    chosen = [0]
    dist = np.sqrt(np.maximum(0.0, 2.0 - 2.0 * cands @ cands[0]))
    while True:
        i = int(np.argmax(dist))
        if dist[i] <= radius:
            break
        chosen.append(i)
        dist = np.minimum(dist, np.sqrt(np.maximum(0.0, 2.0 - 2.0 * cands @ cands[i])))
    return cands[chosen]


def build_eps_net(m: int, epsilon: float, seed: int = 0, verify: int = 100_000) -> np.ndarray:
    """Epsilon-net of the unit sphere in R^m, m in 1..4.

    Greedy farthest-point selection over a seeded candidate cloud, stopped at
    a radius below epsilon, then checked on ``verify`` fresh directions.  The
    candidate cloud is enlarged and the radius tightened until the check passes.
    """
    if m not in (1, 2, 3, 4):
        raise ParameterError(f"nets are built for m in 1..4, got {m}")
    _check_eps(epsilon)
    if m == 1:
        return np.array([[1.0], [-1.0]])
    n_cand = 4000 * 4 ** (m - 1)
    radius = 0.8 * epsilon
    for attempt in range(5):
        rng = SeedSpec(seed, 2 * attempt).generator()
        net = _farthest_point(random_unit_vectors(m, n_cand, rng), radius)
        check_rng = SeedSpec(seed, 2 * attempt + 1).generator()
        if covering_radius_mc(net, verify, check_rng) <= epsilon:
            return net
        n_cand *= 2
        radius *= 0.9
    raise ConstructionError(f"could not verify an {epsilon}-net for m={m}")


def net_check(M, epsilon: float, net: np.ndarray) -> NetCheckReport:
    a = np.asarray(M, dtype=np.float64)
    net = np.asarray(net, dtype=np.float64)
    m = a.shape[0]
    if net.ndim != 2 or net.shape[1] != m:
        raise ParameterError(f"net dimension {net.shape} does not match an {m}x{m} matrix")
    factor = net_factor(epsilon)
    sup = float(np.max(np.abs(np.einsum("ij,jk,ik->i", net, a, net))))
    bound = factor * sup
    true_norm = spectral_norm(a)
    return NetCheckReport(m, epsilon, len(net), net_size_bound(m, epsilon), factor, sup, bound,
                          true_norm, true_norm <= bound + 1e-9)


# --- moderate deviations -------------------------------------------------------

@dataclass(frozen=True)
class ModDevReport:
    n: int
    a_n: float
    mu: float
    reps: int
    tail_hits: int
    rate_hat: float
    rate_target: float
    in_regime: bool  # a_n <= sqrt(n) / log n


def rate_target(mu: float) -> float:
    return -0.5 * mu * mu


def reps_for_hits(n: int, exponent: float, mu: float, hits: int = 200) -> int:
    """Replications giving ``hits`` expected tail events under the Gaussian tail.

    The chi-square sum has a heavier right tail than the Gaussian, so the true
    expected count is larger.
    """
    z = mu * n**exponent
    tail = 0.5 * math.erfc(z / math.sqrt(2.0))
    return math.ceil(hits / tail)


_CHUNK = 1 << 20


def _hits_chunk(n, threshold, k, seed, direct):
    rng = seed.generator()
    if direct:
        hits = 0
        rows = max(1, (1 << 22) // n)
        done = 0
        while done < k:
            b = min(rows, k - done)
            z = rng.standard_normal((b, n))
            s = ((z * z - 1.0) / math.sqrt(2.0)).sum(axis=1)
            hits += int(np.count_nonzero(s >= threshold))
            done += b
        return hits
    # sum of n squared standard normals is chi-square(n)
    s = (rng.chisquare(n, k) - n) / math.sqrt(2.0)
    return int(np.count_nonzero(s >= threshold))


def moddev_check(n: int, a_n_exponent: float, mu: float, reps: int, seed: int = 0,
                 xi: str = GAUSSIAN_CHISQ_CENTERED, direct: bool = False,
                 workers: int = 1) -> ModDevReport:
    """Monte Carlo estimate of log P(S_n / (sqrt(n) a_n) >= mu) / a_n^2.

    S_n sums n i.i.d. copies of (zeta^2 - 1)/sqrt(2).  By default each S_n is
    drawn from its exact law via a chi-square variate; ``direct=True`` sums
    explicit normals instead.  Replications are split into fixed-size chunks,
    chunk c using stream (seed, c), so the result does not depend on ``workers``.
    """
    if xi != GAUSSIAN_CHISQ_CENTERED:
        raise ParameterError(f"unsupported xi law {xi!r}")
    if n < 2:
        raise ParameterError(f"n must be >= 2, got {n}")
    if not 0.0 < a_n_exponent < 0.5:
        raise ParameterError(f"a_n exponent must lie in (0, 0.5), got {a_n_exponent}")
    if not mu > 0:
        raise ParameterError(f"mu must be > 0, got {mu}")
    if reps < 1:
        raise ParameterError(f"reps must be >= 1, got {reps}")
    a_n = n**a_n_exponent
    threshold = mu * math.sqrt(n) * a_n
    sizes = [min(_CHUNK, reps - lo) for lo in range(0, reps, _CHUNK)]
    jobs = [(n, threshold, k, SeedSpec(seed, c), direct) for c, k in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(lambda j: _hits_chunk(*j), jobs))
    else:
        hits = sum(_hits_chunk(*j) for j in jobs)
    if hits == 0:
        raise DegenerateEstimateError(
            f"no tail hits in {reps} replications at n={n}; increase reps or decrease n")
    rate_hat = math.log(hits / reps) / a_n**2
    return ModDevReport(n, a_n, mu, reps, hits, rate_hat, rate_target(mu),
                        a_n <= math.sqrt(n) / math.log(n))
