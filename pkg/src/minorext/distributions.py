"""Entry laws with mean 0, variance 1 and known fourth-moment parameter.

``eta`` is Var(x**2) = E x**4 - 1.  Sampling goes through numpy's Philox
generator keyed by ``(master_seed, stream_id)``: Philox is counter based, so a
stream is a pure function of its key and replication ``k`` can be regenerated
alone, on any worker, in any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ParameterError

GAUSSIAN = "gaussian"
UNIFORM = "uniform"
LAPLACE = "laplace"

KINDS = (GAUSSIAN, UNIFORM, LAPLACE)

# analytic Var(x^2) for the unit-variance version of each law
_ETA = {
    GAUSSIAN: 2.0,  # E z^4 = 3
    UNIFORM: 0.8,  # a = sqrt(3): E x^4 = a^4 / 5 = 9/5
    LAPLACE: 5.0,  # scale 1/sqrt(2): E x^4 = 24 b^4 = 6
}

_UNIFORM_HALF_WIDTH = math.sqrt(3.0)
_LAPLACE_SCALE = 1.0 / math.sqrt(2.0)

_U64 = 2**64


@dataclass(frozen=True)
class EntryDistribution:
    kind: str

    def __post_init__(self):
        if self.kind not in _ETA:
            raise ParameterError(f"unknown distribution kind {self.kind!r}; expected one of {KINDS}")

    @property
    def eta(self) -> float:
        return _ETA[self.kind]


@dataclass(frozen=True)
class SeedSpec:
    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            v = getattr(self, name)
            if not 0 <= v < _U64:
                raise ParameterError(f"{name}={v} is not a 64-bit unsigned integer")

    def generator(self) -> np.random.Generator:
        key = np.array([self.master_seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def __str__(self):
        return f"{self.master_seed}/{self.stream_id}"


def parse_distribution(name: str) -> EntryDistribution:
    """Map a config/CLI name ("gaussian", "uniform", "laplace") to a law."""
    key = name.strip().lower()
    if key == "rademacher":
        # eta = 0 violates Var(x^2) > 0
        raise ConfigError("rademacher entries have Var(x^2) = 0 and are not admissible")
    if key not in _ETA:
        raise ConfigError(f"unknown distribution {name!r}; expected one of {KINDS}")
    return EntryDistribution(key)


def eta_of(dist: EntryDistribution) -> float:
    return dist.eta


def draw(dist: EntryDistribution, rng: np.random.Generator, count: int) -> np.ndarray:
    """Draw ``count`` unit-variance entries from an existing generator."""
    if dist.kind == GAUSSIAN:
        return rng.standard_normal(count)
    if dist.kind == UNIFORM:
        return rng.uniform(-_UNIFORM_HALF_WIDTH, _UNIFORM_HALF_WIDTH, count)
    return rng.laplace(0.0, _LAPLACE_SCALE, count)


def sample_entries(dist: EntryDistribution, seed: SeedSpec, count: int) -> np.ndarray:
    """Deterministic i.i.d. sample of ``count`` entries for the stream ``seed``."""
    if count < 1:
        raise ParameterError(f"count must be >= 1, got {count}")
    return draw(dist, seed.generator(), count)
