"""Monte Carlo runner for the envelope experiments.

Replication ``rep`` of an experiment draws everything from the stream
``(master_seed, rep)``, so any single replication can be re-run alone.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .distributions import GAUSSIAN, EntryDistribution, SeedSpec, parse_distribution
from .errors import ConfigError, MinorExtError
from .matgen import center_scale, gen_data, gen_wigner, gram
from .minor_scan import EXHAUSTIVE, MODES, n_subsets, scan
from .statistics import (absolute_deviations, envelope_gaussian, envelope_general, envelope_wigner,
                         normalized_deviations)

log = logging.getLogger(__name__)

GRAM = "gram"
WIGNER = "wigner"
DEFAULT_SLACK = 0.25
REGIME_LIMIT = 0.5  # m log p / n above this is flagged

CSV_HEADER = ("rep,seed,ensemble,dist,eta,n,p,m,le_m,T,V,zT,zV,envelope,"
              "covered_T,covered_V,wall_time_s")
CONFIG_KEYS = ("ensemble", "dist", "eta", "n", "p", "m", "le_m", "reps", "master_seed",
               "workers", "scan_mode", "slack")


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class ExperimentConfig:
    ensemble: str = GRAM
    dist: EntryDistribution | None = EntryDistribution(GAUSSIAN)
    eta: float | None = None
    n: int | None = None
    p: int = 2
    m: int = 1
    le_m: bool = False
    reps: int = 0
    master_seed: int = 0
    workers: int = 1
    scan_mode: str = EXHAUSTIVE
    slack: float = DEFAULT_SLACK
    budget: int | None = None
    given: frozenset = field(default=frozenset(), compare=False, repr=False)  # keys set by a config file

    def __post_init__(self):
        if self.ensemble not in (GRAM, WIGNER):
            raise ConfigError(f"ensemble must be 'gram' or 'wigner', got {self.ensemble!r}")
        if self.ensemble == GRAM:
            if self.dist is None:
                raise ConfigError("gram ensemble needs a distribution")
            if self.n is None or self.n < 1:
                raise ConfigError(f"gram ensemble needs n >= 1, got {self.n}")
        else:
            if self.eta is None or not self.eta > 0:
                raise ConfigError(f"wigner ensemble needs eta > 0, got {self.eta}")
        if self.p < 1:
            raise ConfigError(f"p must be >= 1, got {self.p}")
        if not 1 <= self.m <= self.p:
            raise ConfigError(f"need 1 <= m <= p, got m={self.m}, p={self.p}")
        if self.reps < 0:
            raise ConfigError(f"reps must be >= 0, got {self.reps}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.scan_mode not in MODES:
            raise ConfigError(f"scan_mode must be one of {MODES}, got {self.scan_mode!r}")
        if not self.slack >= 0:
            raise ConfigError(f"slack must be >= 0, got {self.slack}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")
        n_subsets(self.p, self.m)

    @property
    def entry_eta(self) -> float:
        return self.dist.eta if self.ensemble == GRAM else self.eta

    @property
    def outside_regime(self) -> bool:
        """Advisory: m log p / n is not small (Gram ensemble only)."""
        return self.ensemble == GRAM and self.m * math.log(self.p) / self.n > REGIME_LIMIT

    def resolved(self) -> dict:
        out = {}
        for k in CONFIG_KEYS:
            v = getattr(self, k)
            out[k] = v.kind if isinstance(v, EntryDistribution) else v
        return out


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


_CONVERT = {
    "ensemble": lambda s: s.strip().lower(),
    "dist": parse_distribution,
    "eta": float,
    "n": int,
    "p": int,
    "m": int,
    "le_m": _parse_bool,
    "reps": int,
    "master_seed": int,
    "workers": int,
    "scan_mode": lambda s: {"exact": EXHAUSTIVE}.get(s.strip().lower(), s.strip().lower()),
    "slack": float,
}


def parse_config(text: str, **overrides) -> ExperimentConfig:
    """Parse ``key = value`` (or ``key: value``) lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        sep = "=" if "=" in line else ":"
        if sep not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (part.strip() for part in line.split(sep, 1))
        if key not in _CONVERT:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _CONVERT[key](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    given = frozenset(values)
    values.update({k: v for k, v in overrides.items() if v is not None})
    if values.get("ensemble") == WIGNER:
        values.setdefault("dist", None)
    return ExperimentConfig(**values, given=given)


@dataclass(frozen=True)
class ReplicationRecord:
    rep: int
    seed: str
    T: float
    V: float
    zT: float
    zV: float
    envelope: float
    covered_T: bool
    covered_V: bool
    wall_time: float = field(compare=False)


class ReplicationError(MinorExtError):
    def __init__(self, rep, cause, records):
        super().__init__(f"replication {rep} failed: {cause}")
        self.rep = rep
        self.records = records


def envelope_for(cfg: ExperimentConfig):
    """Envelope of the experiment; None when p = 1 (log p = 0 leaves it undefined)."""
    if cfg.p < 2:
        return None
    if cfg.ensemble == WIGNER:
        return envelope_wigner(cfg.p, cfg.m, cfg.eta)
    if cfg.dist.kind == GAUSSIAN:
        return envelope_gaussian(cfg.n, cfg.p, cfg.m)
    return envelope_general(cfg.n, cfg.p, cfg.m, cfg.dist.eta)


def replication_matrix(cfg: ExperimentConfig, rep: int):
    """The symmetric matrix scanned in replication ``rep``."""
    seed = SeedSpec(cfg.master_seed, rep)
    if cfg.ensemble == WIGNER:
        return gen_wigner(cfg.p, cfg.eta, seed)
    return gram(gen_data(cfg.dist, cfg.n, cfg.p, seed))


def run_replication(cfg: ExperimentConfig, rep: int, scan_workers: int = 1) -> ReplicationRecord:
    start = time.perf_counter()
    env = envelope_for(cfg)
    res = scan(replication_matrix(cfg, rep), cfg.m, le_m=cfg.le_m, mode=cfg.scan_mode,
               workers=scan_workers, budget=cfg.budget)
    if env is None:
        zt = zv = math.nan
    elif cfg.ensemble == WIGNER:
        zt, zv = absolute_deviations(res.T, res.V, env)
    else:
        zt, zv = normalized_deviations(res.T, res.V, cfg.n, env)
    return ReplicationRecord(
        rep=rep,
        seed=str(SeedSpec(cfg.master_seed, rep)),
        T=res.T,
        V=res.V,
        zT=zt,
        zV=zv,
        envelope=math.nan if env is None else env.value,
        covered_T=zt <= 1.0 + cfg.slack,
        covered_V=zv >= -1.0 - cfg.slack,
        wall_time=time.perf_counter() - start,
    )


def run_experiment(cfg: ExperimentConfig):
    """Run all replications; returns (records ordered by rep, summary)."""
    if cfg.outside_regime:
        log.warning("m log p / n = %.3g exceeds %.2g: outside the asymptotic regime",
                    cfg.m * math.log(cfg.p) / cfg.n, REGIME_LIMIT)
    records = []
    if cfg.workers == 1 or cfg.reps <= 1:
        # a single replication gets all workers for its scan
        for rep in range(cfg.reps):
            try:
                records.append(run_replication(cfg, rep, scan_workers=cfg.workers))
            except MinorExtError as exc:
                raise ReplicationError(rep, exc, records) from exc
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            futs = [pool.submit(run_replication, cfg, rep) for rep in range(cfg.reps)]
            for rep, fut in enumerate(futs):
                try:
                    records.append(fut.result())
                except MinorExtError as exc:
                    for f in futs:
                        f.cancel()
                    raise ReplicationError(rep, exc, records) from exc
    summary = aggregate_coverage(records, cfg.slack)
    summary["outside_asymptotic_regime"] = cfg.outside_regime
    summary["config"] = cfg.resolved()
    return records, summary


def aggregate_coverage(records, slack: float = DEFAULT_SLACK) -> dict:
    """Coverage fractions and z-statistic ranges; coverage is recomputed from slack."""
    if not records:
        return {"empty": True, "reps": 0, "slack": slack}
    zt = np.array([r.zT for r in records])
    zv = np.array([r.zV for r in records])
    cov_t = zt <= 1.0 + slack
    cov_v = zv >= -1.0 - slack
    return {
        "empty": False,
        "reps": len(records),
        "slack": slack,
        "frac_T": float(cov_t.mean()),
        "frac_V": float(cov_v.mean()),
        "frac_joint": float((cov_t & cov_v).mean()),
        "zT_min": float(zt.min()),
        "zT_median": float(np.median(zt)),
        "zT_max": float(zt.max()),
        "zV_min": float(zv.min()),
        "zV_median": float(np.median(zv)),
        "zV_max": float(zv.max()),
    }


def coverage_sweep(cfg: ExperimentConfig, **axis):
    """Run ``cfg`` once per value of a single varied field, e.g. ``n=[1024, 4096]``.

    Returns the trend table: one summary row per value, in the given order.
    """
    if len(axis) != 1:
        raise ConfigError("coverage_sweep varies exactly one field")
    (name, values), = axis.items()
    if name not in {f.name for f in fields(ExperimentConfig)}:
        raise ConfigError(f"unknown field {name!r}")
    table = []
    for v in values:
        _, summary = run_experiment(replace(cfg, **{name: v}))
        summary.pop("config")
        table.append({name: v, **summary})
    return table


def records_to_csv(records, cfg: ExperimentConfig, timing: bool = False) -> str:
    """CSV text in the fixed schema.

    ``wall_time_s`` is left empty unless ``timing`` is set, so that repeated
    runs of one config produce byte-identical files.
    """
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    gram_ens = cfg.ensemble == GRAM
    for r in records:
        w.writerow([
            r.rep,
            r.seed,
            cfg.ensemble,
            cfg.dist.kind if gram_ens else "",
            fmt_float(cfg.entry_eta),
            cfg.n if gram_ens else "",
            cfg.p,
            cfg.m,
            str(cfg.le_m).lower(),
            fmt_float(r.T),
            fmt_float(r.V),
            fmt_float(r.zT),
            fmt_float(r.zV),
            fmt_float(r.envelope),
            str(r.covered_T).lower(),
            str(r.covered_V).lower(),
            fmt_float(r.wall_time) if timing else "",
        ])
    return buf.getvalue()


def centered_extremes(cfg: ExperimentConfig, rep: int):
    """(lambda_max(m), lambda_min(m)) on A = (W - nI)/sqrt(n) for a Gram replication."""
    if cfg.ensemble != GRAM:
        raise ConfigError("centered statistics exist for the gram ensemble only")
    a = center_scale(replication_matrix(cfg, rep), cfg.n)
    res = scan(a, cfg.m, le_m=cfg.le_m, mode=cfg.scan_mode)
    return res.T, res.V
