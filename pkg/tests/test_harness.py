import csv
import io
import math
from dataclasses import replace

import pytest

from minorext.distributions import GAUSSIAN, LAPLACE, EntryDistribution
from minorext.errors import ConfigError
from minorext.harness import (CSV_HEADER, ExperimentConfig, ReplicationRecord, aggregate_coverage,
                              centered_extremes, coverage_sweep, parse_config, records_to_csv,
                              run_experiment, run_replication)
from minorext.minor_scan import PRUNED
from minorext.statistics import envelope_general, envelope_wigner


def gram_cfg(**kw):
    base = dict(dist=EntryDistribution(GAUSSIAN), n=256, p=10, m=2, reps=6, master_seed=42)
    return ExperimentConfig(**(base | kw))


def test_empty_run():
    records, summary = run_experiment(gram_cfg(reps=0))
    assert records == [] and summary["empty"] is True and "frac_T" not in summary
    assert records_to_csv(records, gram_cfg()) == CSV_HEADER + "\n"


def test_csv_deterministic_and_schema():
    cfg = gram_cfg()
    a = records_to_csv(run_experiment(cfg)[0], cfg)
    b = records_to_csv(run_experiment(cfg)[0], cfg)
    assert a == b
    rows = list(csv.DictReader(io.StringIO(a)))
    assert list(rows[0]) == CSV_HEADER.split(",")
    assert [r["rep"] for r in rows] == [str(i) for i in range(6)]
    assert rows[0]["seed"] == "42/0" and rows[0]["wall_time_s"] == ""
    for r in rows:
        T = float(r["T"])
        assert format(T, ".17g") == r["T"]
    timed = records_to_csv(run_experiment(cfg)[0], cfg, timing=True)
    assert all(float(r["wall_time_s"]) >= 0 for r in csv.DictReader(io.StringIO(timed)))


def test_records_invariant_to_workers_and_mode():
    cfg = gram_cfg(reps=5)
    ref = run_experiment(cfg)[0]
    for kw in (dict(workers=3), dict(scan_mode=PRUNED), dict(workers=2, scan_mode=PRUNED)):
        assert run_experiment(replace(cfg, **kw))[0] == ref


def test_single_replication_reproducible():
    cfg = gram_cfg(reps=4)
    records = run_experiment(cfg)[0]
    assert run_replication(cfg, 2) == records[2]


def test_identity_per_record():
    cfg = gram_cfg(reps=4, n=500)
    for rec in run_experiment(cfg)[0]:
        lmax, lmin = centered_extremes(cfg, rec.rep)
        assert rec.T == pytest.approx(cfg.n + math.sqrt(cfg.n) * lmax, rel=1e-9)
        assert rec.V == pytest.approx(cfg.n + math.sqrt(cfg.n) * lmin, rel=1e-9)


def test_le_m_dominates_exact_m():
    cfg = gram_cfg(reps=5, m=3)
    exact = run_experiment(cfg)[0]
    upto = run_experiment(replace(cfg, le_m=True))[0]
    for a, b in zip(exact, upto):
        assert b.T >= a.T and b.V <= a.V


def test_covered_flags_consistent():
    cfg = gram_cfg(reps=8, n=64, slack=0.0)
    for r in run_experiment(cfg)[0]:
        assert r.covered_T == (r.zT <= 1.0) and r.covered_V == (r.zV >= -1.0)


def test_envelopes_used():
    r = run_replication(gram_cfg(dist=EntryDistribution(LAPLACE)), 0)
    assert r.envelope == envelope_general(256, 10, 2, 5.0).value
    w = ExperimentConfig(ensemble="wigner", dist=None, eta=4.0, p=12, m=2, reps=1)
    rw = run_replication(w, 0)
    assert rw.envelope == envelope_wigner(12, 2, 4.0).value
    assert rw.zT == rw.T / rw.envelope and rw.zV == rw.V / rw.envelope


def _rec(zT, zV):
    return ReplicationRecord(0, "0/0", 0.0, 0.0, zT, zV, 1.0, True, True, 0.0)


def test_aggregate():
    s = aggregate_coverage([_rec(0.2, -0.3), _rec(0.5, 0.1)], 0.25)
    assert (s["frac_T"], s["frac_V"], s["frac_joint"]) == (1.0, 1.0, 1.0)
    s = aggregate_coverage([_rec(1.3, 0.0)], 0.25)
    assert s["frac_T"] == 0.0 and s["frac_V"] == 1.0
    s = aggregate_coverage([_rec(0.0, -2.0), _rec(2.0, 0.0), _rec(0.0, 0.0)], 0.25)
    assert s["frac_joint"] == pytest.approx(1 / 3)
    assert (s["zT_min"], s["zT_median"], s["zT_max"]) == (0.0, 0.0, 2.0)
    assert aggregate_coverage([], 0.25)["empty"] is True


def test_sweep_table():
    table = coverage_sweep(gram_cfg(reps=3), n=[64, 256])
    assert [row["n"] for row in table] == [64, 256]
    assert all(0 <= row["frac_joint"] <= 1 for row in table)


def test_regime_flag():
    _, s = run_experiment(gram_cfg(n=8, p=10, m=2, reps=1))
    assert s["outside_asymptotic_regime"] is True
    _, s = run_experiment(gram_cfg(reps=1))
    assert s["outside_asymptotic_regime"] is False


def test_parse_config():
    text = """
    # gaussian baseline
    ensemble = gram
    dist = gaussian
    n = 128
    p: 9
    m = 2
    le_m = true
    reps = 3
    master_seed = 7
    workers = 2
    scan_mode = exact
    slack = 0.25
    """
    cfg = parse_config(text)
    assert (cfg.n, cfg.p, cfg.m, cfg.le_m, cfg.workers, cfg.scan_mode) == (128, 9, 2, True, 2, "exhaustive")
    assert parse_config(text, workers=5).workers == 5
    w = parse_config("ensemble = wigner\neta = 1.5\np = 10\nm = 2\nreps = 1\n")
    assert w.dist is None and w.eta == 1.5


@pytest.mark.parametrize("text", [
    "bogus = 1",
    "n = 12\nn = 13",
    "dist = rademacher\nn = 10\np = 4",
    "dist = gaussian\np = 4",              # gram without n
    "ensemble = wigner\np = 4",            # wigner without eta
    "n = 10\np = 4\nm = 5",
    "n = 10\np = 4\nle_m = maybe",
    "n = ten",
    "just words",
])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_budget_error_carries_partial_records():
    from minorext.harness import ReplicationError
    cfg = gram_cfg(reps=2, budget=10)
    with pytest.raises(ReplicationError) as exc:
        run_experiment(cfg)
    assert exc.value.rep == 0 and exc.value.records == []
