"""Acceptance criteria, one test each, at the stated tolerances.

Every test prints (and records for the session summary) a single
``CRITERION n: PASS|FAIL|N/A`` line. Run alone with::

    pytest tests/test_acceptance.py -v -s
"""
import functools
import itertools
import math
import random
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from harness import mutations, random_trial
from oracles import chaskey_oracle, reducer_oracle, tick_oracle
from vectors import CHASKEY12_128, KEY_HEX

from tamperlog import auditor as A
from tamperlog import bench, games
from tamperlog.analytics import LEVELS, factorial_fit, fieller_ci
from tamperlog.archive import KeyFile
from tamperlog.combiner import Combiner, combine, uncombine
from tamperlog.encoder import EncodedRecord, default_schema, encode
from tamperlog.flow import KB, MB, Arrival, FlowConfig, required_ring_size, simulate
from tamperlog.pipeline import Pipeline
from tamperlog.prf import Tag, chaskey_mac
from tamperlog.reducer import ShardedReducer, window
from tamperlog.tracegen import TraceSpec, generate
from tamperlog.workflow import sign_events


def report(n, title):
    def deco(fn):
        @functools.wraps(fn)
        def run(*a, **kw):
            t0 = time.perf_counter()
            try:
                detail = fn(*a, **kw) or ""
            except pytest.skip.Exception as exc:
                _emit(n, f"CRITERION {n}: N/A  {title} ({exc.msg})")
                raise
            except BaseException as exc:
                _emit(n, f"CRITERION {n}: FAIL {title} ({type(exc).__name__}: {str(exc)[:120]})")
                raise
            _emit(n, f"CRITERION {n}: PASS {title} [{time.perf_counter() - t0:.1f}s] {detail}".rstrip())
        return run
    return deco


def _emit(n, line):
    ACCEPTANCE.append((n, line))
    print(line)


@report(1, "Chaskey: 64 vectors match the straight-line oracle, < 1 s")
def test_criterion_1_chaskey_vectors():
    key = bytes.fromhex(KEY_HEX)
    t0 = time.perf_counter()
    got = [chaskey_mac(key, bytes(range(n)), 12, 128).to_bytes() for n in range(64)]
    want = [chaskey_oracle(key, bytes(range(n)), 12) for n in range(64)]
    elapsed = time.perf_counter() - t0
    assert got == want
    assert [g.hex() for g in got] == CHASKEY12_128
    assert elapsed < 1.0, f"{elapsed:.2f}s"
    return "64/64"


@report(2, "Combiner algebra over 1e4 cases; removal exhaustive at q = 6")
def test_criterion_2_combiner_algebra():
    r = random.Random(2)
    c = Combiner(64)
    zero = Tag.zero(64)
    for _ in range(10_000):
        x, y = Tag(r.getrandbits(64), 64), Tag(r.getrandbits(64), 64)
        assert combine(x, y) == combine(y, x)
        assert uncombine(combine(x, y), y) == x
        assert combine(x, zero) == x
        n = r.randint(1, 5)
        pairs = [(r.randbytes(16), r.randbytes(r.randrange(1, 24))) for _ in range(n)]
        shuffled = r.sample(pairs, n)
        assert c.aggregate(*zip(*pairs)) == c.aggregate(*zip(*shuffled))
    keys = [r.randbytes(16) for _ in range(6)]
    msgs = [r.randbytes(20) for _ in range(6)]
    for rr in range(1, 7):
        t = c.aggregate(keys[:rr], msgs[:rr])
        for i in range(rr, 0, -1):
            t = uncombine(t, c.mac(keys[i - 1], msgs[i - 1]))
            assert t == c.aggregate(keys[:i - 1], msgs[:i - 1])
        for i in range(rr):
            rest = c.aggregate(keys[:i] + keys[i + 1:rr], msgs[:i] + msgs[i + 1:rr])
            assert uncombine(c.aggregate(keys[:rr], msgs[:rr]), c.mac(keys[i], msgs[i])) == rest


def _suite(cadence, trials=10_000, seed=3):
    r = random.Random(seed)
    honest = flagged = total = exact = 0
    kinds = {}
    t0 = time.perf_counter()
    for _ in range(trials):
        trial = random_trial(r, cadence=cadence, max_q=64, max_lines=4)
        honest += trial.auditor.verify(trial.audit).intact
        for m in mutations(trial, r):
            v = trial.auditor.verify(m.audit)
            total += 1
            flagged += not v.intact
            kinds[m.kind] = kinds.get(m.kind, 0) + 1
            line = v[m.line]
            if cadence == 1:
                exact += line.prefix_length == m.true_prefix
            else:
                stored = [cp.index for cp in m.audit.checkpoints[m.line]]
                exact += line.s == max([j for j in stored if j <= m.true_prefix], default=0)
    return dict(trials=trials, honest=honest, flagged=flagged, total=total, exact=exact,
                kinds=kinds, seconds=time.perf_counter() - t0)


@pytest.fixture(scope="module")
def suite_k1():
    return _suite(1)


@pytest.fixture(scope="module")
def suite_k4():
    return _suite(4, seed=4)


@report(3, "FA detection over 1e4 pipelines, zero false alarms, < 60 s")
def test_criterion_3_fa_detection(suite_k1):
    s = suite_k1
    assert s["honest"] == s["trials"], "false alarm on an honest run"
    assert s["flagged"] == s["total"], f"{s['total'] - s['flagged']} mutations missed"
    assert set(s["kinds"]) >= {"truncate", "truncate+checkpoint", "modify", "delete", "insert", "reorder"}
    assert s["seconds"] < 60, f"{s['seconds']:.1f}s"
    return f"{s['total']} mutations, {s['seconds']:.1f}s"


@report(4, "Truncation + stored checkpoint rejected in 1e3 of 1e3 trials")
def test_criterion_4_truncation_closure():
    r = random.Random(4)
    rejected = 0
    for _ in range(1000):
        trial = random_trial(r, cadence=r.choice([1, 2, 4]), max_q=64, max_lines=4)
        lines = [c for c in range(trial.audit.n_cores)
                 if any(not cp.terminal and cp.index < len(trial.by_line[c])
                        for cp in trial.audit.checkpoints[c])]
        while not lines:
            trial = random_trial(r, cadence=1, max_q=64, max_lines=2)
            lines = [c for c in range(trial.audit.n_cores) if len(trial.by_line[c]) > 1]
        line = r.choice(lines)
        k = r.choice([cp.index for cp in trial.audit.checkpoints[line]
                      if not cp.terminal and cp.index < len(trial.by_line[line])])
        rejected += not trial.auditor.verify(A.attack_truncate(trial.audit, line, k, True)).intact
    assert rejected == 1000
    # the same move against plaintext tag storage wins every time
    plain = games.win_count(games.game_fa, games.TruncationAdversary(2), 200, 6, 64, encrypt_tags=False)
    assert plain == 200
    return "plaintext-tag baseline broken 200/200"


@report(5, "Prefix extraction exact at k = 1; largest checkpoint <= prefix at k = 4")
def test_criterion_5_prefix_extraction(suite_k1, suite_k4):
    assert suite_k1["exact"] == suite_k1["total"]
    assert suite_k4["exact"] == suite_k4["total"]
    assert suite_k4["flagged"] == suite_k4["total"] and suite_k4["honest"] == suite_k4["trials"]
    return f"{suite_k1['total']} + {suite_k4['total']} mutations"


@report(6, "Random forgery at tau = 16 within 3 sigma of 2^-16 over 1e6 trials, < 5 min")
def test_criterion_6_forgery_rate():
    trials, p = 1_000_000, 2.0 ** -16
    t0 = time.perf_counter()
    wins = games.win_count(games.game_forge, games.RandomTagForger(16), trials, 2, 16, seed=16)
    elapsed = time.perf_counter() - t0
    mean, sd = trials * p, math.sqrt(trials * p * (1 - p))
    assert abs(wins - mean) <= 3 * sd, f"{wins} wins vs {mean:.2f} +- {3 * sd:.2f}"
    assert elapsed < 300
    return f"{wins} wins, expected {mean:.2f} +- {3 * sd:.2f}"


@report(7, "Flow control: reference config lossless, 5760 KB ring, oracle parity on 100 traces")
def test_criterion_7_flow_control():
    assert required_ring_size(36, 32 * KB, 200, 1000) == 5760 * KB
    cfg = FlowConfig(32 * KB, 64 * MB, 200, 1000, 36)
    r = random.Random(7)
    for _ in range(20):
        trace = []
        for k in range(r.randint(1, 15)):
            for c in range(36):
                budget = r.randint(0, 32 * KB)
                while budget > 0:
                    size = min(budget, r.randint(16, 4096))
                    budget -= size
                    trace.append(Arrival(k * 200 + r.uniform(0, 199.999), c, size))
        trace.sort()
        rep = simulate(cfg, trace)
        assert rep.d_discarded == 0 and rep.d_delivered == rep.d_total
    for _ in range(100):
        n = r.randint(1, 4)
        small = FlowConfig(s_p=r.randint(50, 400), s_r=r.randint(100, 1500),
                           t_p=r.randint(1, 40), t_r=r.randint(1, 120), n_cores=n)
        times = sorted(r.randrange(r.randint(1, 600)) for _ in range(r.randint(0, 300)))
        trace = [Arrival(t, r.randrange(n), r.randint(1, 120)) for t in times]
        rep = simulate(small, trace)
        got = dict(total=rep.d_total, core=rep.d_core_dropped, ring=rep.d_ring_dropped,
                   delivered=rep.d_delivered, flushes=rep.core_flushes, drains=rep.ring_drains)
        assert got == tick_oracle(small, trace)


@report(8, "Reducer parity on 100 traces, exact window formula, reduce-then-sign verifies")
def test_criterion_8_reducer():
    for seed in range(100):
        r = random.Random(1000 + seed)
        dynamic = bool(seed % 2)
        spec = TraceSpec(duration=r.uniform(0.5, 3), rate=r.uniform(100, 800), n_cores=r.randint(1, 3),
                         dup_rate=r.uniform(0, 0.95), seed=seed, n_pids=r.randint(1, 8))
        events = generate(spec)
        red = ShardedReducer(spec.n_cores, dynamic=dynamic, capacity=max(1, len(events)))
        assert [red.filter(e) for e in events] == reducer_oracle(events, dynamic)
    r = random.Random(8)
    for _ in range(10_000):
        t0 = r.uniform(0, 1e5)
        t1 = t0 + r.choice([r.uniform(0, 1e-3), r.uniform(0, 1), r.uniform(0, 100)])
        assert window(t0, t1) == min(1, 2 * (t1 - t0) + 0.001)
    key = KeyFile(bytes(range(16)), 3, cadence=8)
    for mode in ("fixed", "dynamic"):
        events = generate(TraceSpec(duration=1, rate=1500, n_cores=3, dup_rate=0.7, seed=88))
        res = sign_events(events, key, reduce=mode)
        assert res.signed < len(events)
        assert A.verify(res.archive.to_audit_input(key.master_seed)).intact


@report(9, "Analytics: planted factorial model exact, fractions sum to 1, Fieller coverage 90% +- 3%")
def test_criterion_9_analytics():
    cells = [[[10 + 2 * xs + xb + 0.5 * xs * xb] * 3 for xb in LEVELS] for xs in LEVELS]
    fit = factorial_fit(cells)
    assert abs(fit.f_s - 4 / 5.25) < 1e-12
    assert abs(fit.f_s + fit.f_b + fit.f_i + fit.f_e - 1) < 1e-12
    rng = np.random.default_rng(9)
    for _ in range(200):
        noisy = rng.normal(0, 1, (2, 2, 5)) + rng.normal(0, 3, (2, 2, 1))
        f = factorial_fit(noisy.tolist())
        assert abs(f.f_s + f.f_b + f.f_i + f.f_e - 1) < 1e-12
    reps, n, hits = 10_000, 30, 0
    mu, cov = np.array([5.0, 8.0]), np.array([[1.0, 0.5], [0.5, 2.0]])
    samples = rng.multivariate_normal(mu, cov, (reps, n))
    for s in samples:
        hits += mu[0] / mu[1] in fieller_ci(s[:, 0], s[:, 1], 0.90)
    coverage = hits / reps
    assert abs(coverage - 0.90) <= 0.03, f"coverage {coverage:.4f}"
    return f"coverage {coverage:.4f}"


@report(10, "Per-core signing throughput >= single-line on >= 4 hardware threads")
def test_criterion_10_per_core_throughput():
    threads = bench.hardware_threads()
    schema = default_schema()
    events = generate(TraceSpec(duration=4.0 if threads >= 4 else 0.5, rate=5000,
                                n_cores=max(threads, 4), seed=10))
    records = [encode(e, schema) for e in events]
    single, per_core = bench.run_bench(bytes(16), records, max(threads, 4), threads, "both")
    ratio = per_core.records_per_sec / single.records_per_sec
    if threads < 4:
        pytest.skip(f"only {threads} hardware thread(s); needs >= 4 "
                    f"(informational: per-core/single-line = {ratio:.2f}x)")
    assert ratio >= 1.0, f"per-core/single-line = {ratio:.2f}"
    return f"speedup {ratio:.2f}x on {threads} threads"


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
