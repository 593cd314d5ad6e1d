import math
from itertools import combinations

import numpy as np
import pytest

from minorext.distributions import EntryDistribution, SeedSpec
from minorext.matgen import gen_data, gram


def brute_force_scan(w, m, le_m=False):
    """Independent oracle: itertools enumeration + LAPACK eigvalsh.

    Returns (T, V, argmax, argmin) with ties going to the first subset in
    colex order (smaller size first when le_m).
    """
    w = np.asarray(w)
    p = w.shape[0]
    best = [-math.inf, math.inf, None, None]
    for k in (range(1, m + 1) if le_m else (m,)):
        subsets = sorted(combinations(range(p), k), key=lambda s: s[::-1])  # colex
        for S in subsets:
            ev = np.linalg.eigvalsh(w[np.ix_(S, S)])
            if ev[-1] > best[0]:
                best[0], best[2] = ev[-1], S
            if ev[0] < best[1]:
                best[1], best[3] = ev[0], S
    return tuple(best)


def random_gram(n, p, seed, dist="gaussian"):
    return gram(gen_data(EntryDistribution(dist), n, p, SeedSpec(seed, 0)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
