"""Signing throughput: one shared line versus one line per core.

Per-core mode fans lines out to worker processes (the GIL rules out threads
for CPU-bound signing). Timings are wall clock and machine dependent.
"""
from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .errors import ConfigError
from .flow import FlowConfig, simulate
from .xlog import line_init


def hardware_threads() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1


def _sign_line(args):
    seed, core, n_cores, tau, rounds, cadence, messages = args
    line = line_init(seed, core, n_cores, tau, rounds)
    for m in messages:
        line.sign(m, cadence > 0 and (line.index + 1) % cadence == 0)
    return core, line.tag


def sign_single_line(seed, records, tau=64, rounds=12, cadence=1024):
    """Every record through line 0, in arrival order."""
    _, tag = _sign_line((seed, 0, 1, tau, rounds, cadence, [r.mac_input for r in records]))
    return tag


def sign_per_core(seed, records, n_cores, threads, tau=64, rounds=12, cadence=1024):
    """Final tag of each line, with lines signed in parallel worker processes."""
    if threads < 1:
        raise ConfigError("--threads must be at least 1")
    by_core = [[] for _ in range(n_cores)]
    for r in records:
        by_core[r.core_id].append(r.mac_input)
    jobs = [(seed, c, n_cores, tau, rounds, cadence, by_core[c]) for c in range(n_cores)]
    if threads == 1:
        results = map(_sign_line, jobs)
        return [tag for _, tag in sorted(results, key=lambda x: x[0])]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(_sign_line, jobs))
    return [tag for _, tag in sorted(results, key=lambda x: x[0])]


@dataclass
class BenchRow:
    mode: str
    threads: int
    records: int
    seconds: float

    @property
    def records_per_sec(self) -> float:
        return self.records / self.seconds if self.seconds else float("inf")


def run_bench(seed, records, n_cores, threads, mode="both", tau=64, rounds=12, cadence=1024):
    rows = []
    if records:  # load the compiled kernel outside the timed region
        _sign_line((seed, 0, 1, tau, rounds, 0, [records[0].mac_input]))
    if mode in ("single-line", "both"):
        t0 = time.perf_counter()
        sign_single_line(seed, records, tau, rounds, cadence)
        rows.append(BenchRow("single-line", 1, len(records), time.perf_counter() - t0))
    if mode in ("per-core", "both"):
        t0 = time.perf_counter()
        sign_per_core(seed, records, n_cores, threads, tau, rounds, cadence)
        rows.append(BenchRow("per-core", threads, len(records), time.perf_counter() - t0))
    return rows


# buffering levels for the 2x2 design: frequent small pushes versus
# occasional time-controlled ones
FREQUENT = dict(t_p=10.0, t_r=50.0)
OCCASIONAL = dict(t_p=200.0, t_r=1000.0)


def factorial_runs(seed, records, arrivals, n_cores, threads, replicates=3,
                   s_p=32 * 1024, s_r=64 * 1024 * 1024):
    """Wall time of sign + buffer for each (signing, buffering) cell.

    Rows are ``(x_s, x_b, seconds)`` with x_s = -1 for per-core signing and
    x_b = -1 for occasional pushes.
    """
    rows = []
    for _ in range(replicates):
        for x_s in (-1, 1):
            for x_b in (-1, 1):
                cfg = FlowConfig(s_p, s_r, n_cores=n_cores, **(OCCASIONAL if x_b < 0 else FREQUENT))
                t0 = time.perf_counter()
                if x_s < 0:
                    sign_per_core(seed, records, n_cores, threads)
                else:
                    sign_single_line(seed, records)
                simulate(cfg, arrivals)
                rows.append((x_s, x_b, time.perf_counter() - t0))
    return rows
