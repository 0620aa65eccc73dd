"""Two-level buffering model: per-core buffers flush into a shared ring every
``t_p`` ms, the ring drains to the sink every ``t_r`` ms.

Simulation runs on a virtual clock. Flush ticks sit at multiples of the
interval. At a given instant the order is: per-core flush, ring drain, then
arrivals stamped with that instant. Records are atomic; a record that does not
fit where it is headed is dropped (drop-newest). After the last arrival the
clock runs until the next flush and the drain following it, so every byte is
either delivered or dropped.
"""
from __future__ import annotations

import csv
import itertools
import math
from collections import deque
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .errors import ConfigError, FormatError, InputError

KB = 1024
MB = 1024 * KB


class Arrival(NamedTuple):
    time: float  # ms
    core: int
    size: int  # bytes


@dataclass(frozen=True)
class FlowConfig:
    s_p: int
    s_r: int
    t_p: float
    t_r: float
    n_cores: int

    def __post_init__(self):
        for name in ("s_p", "s_r", "t_p", "t_r", "n_cores"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")

    @property
    def feasible(self) -> bool:
        return self.s_r >= self.t_r * self.n_cores * self.s_p / self.t_p


def required_ring_size(n: int, s_p: int, t_p: float, t_r: float) -> int:
    """Smallest ring (bytes) that absorbs ``t_r / t_p`` full flushes of ``n`` buffers."""
    if min(n, s_p, t_p, t_r) <= 0:
        raise ConfigError("all sizing inputs must be positive")
    return math.ceil(t_r * n * s_p / t_p)


@dataclass
class LossReport:
    d_total: int = 0
    d_core_dropped: int = 0
    d_ring_dropped: int = 0
    d_delivered: int = 0
    core_flushes: int = 0
    ring_drains: int = 0
    delivered: list | None = field(default=None, repr=False)

    @property
    def d_discarded(self) -> int:
        return self.d_core_dropped + self.d_ring_dropped

    @property
    def p_loss(self) -> float:
        return self.d_discarded / self.d_total if self.d_total else 0.0

    @property
    def flushes(self) -> int:
        return self.core_flushes + self.ring_drains

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("delivered")
        d.update(d_discarded=self.d_discarded, p_loss=self.p_loss, flushes=self.flushes)
        return d


def _check_sorted(trace):
    prev = -math.inf
    for i, a in enumerate(trace):
        if a.time < prev:
            raise InputError(f"trace not time-sorted at arrival {i}")
        if a.time < 0 or a.size < 0:
            raise InputError(f"negative time or size at arrival {i}")
        prev = a.time


def _end_time(cfg: FlowConfig, last: float) -> float:
    flush = (math.floor(last / cfg.t_p) + 1) * cfg.t_p
    return math.ceil(flush / cfg.t_r) * cfg.t_r


def simulate(config: FlowConfig, trace: Sequence[Arrival], track: bool = False) -> LossReport:
    """Event-driven run over ``trace``; ``track`` records per-arrival delivery."""
    trace = [Arrival(*a) for a in trace]
    _check_sorted(trace)
    cfg = config
    rep = LossReport(delivered=[False] * len(trace) if track else None)
    buffers = [deque() for _ in range(cfg.n_cores)]
    fill = [0] * cfg.n_cores
    ring: list = []
    ring_fill = 0
    k_flush = k_drain = 1  # tick k sits exactly at k * interval

    def flush():
        nonlocal ring_fill
        for c in range(cfg.n_cores):
            buf = buffers[c]
            if not buf:
                continue
            rep.core_flushes += 1
            while buf:
                idx, size = buf.popleft()
                if ring_fill + size <= cfg.s_r:
                    ring.append((idx, size))
                    ring_fill += size
                else:
                    rep.d_ring_dropped += size
            fill[c] = 0

    def drain():
        nonlocal ring_fill
        if not ring:
            return
        rep.ring_drains += 1
        for idx, size in ring:
            rep.d_delivered += size
            if track:
                rep.delivered[idx] = True
        ring.clear()
        ring_fill = 0

    def advance(t):
        nonlocal k_flush, k_drain
        while True:
            f, d = k_flush * cfg.t_p, k_drain * cfg.t_r
            if min(f, d) > t:
                return
            if f <= d:
                flush()
                k_flush += 1
            else:
                drain()
                k_drain += 1

    for idx, (t, core, size) in enumerate(trace):
        if not 0 <= core < cfg.n_cores:
            raise InputError(f"arrival {idx}: core {core} outside 0..{cfg.n_cores - 1}")
        advance(t)
        rep.d_total += size
        if fill[core] + size <= cfg.s_p:
            buffers[core].append((idx, size))
            fill[core] += size
        else:
            rep.d_core_dropped += size
    if trace:
        advance(_end_time(cfg, trace[-1].time))
    return rep


# -- parameter sweeps -------------------------------------------------------

def reference_grid(n_cores: int = 36) -> list:
    """7 x 7 x 6 x 6 design space: S_p 0.5-32 KB and S_r 1-64 MB doubling,
    T_p 5-255 ms in 50 ms steps, T_r 0.5-3 s in 0.5 s steps."""
    s_ps = [512 * 2**i for i in range(7)]
    s_rs = [MB * 2**i for i in range(7)]
    t_ps = [5 + 50 * i for i in range(6)]
    t_rs = [500 * (i + 1) for i in range(6)]
    return [FlowConfig(sp, sr, tp, tr, n_cores)
            for sp, sr, tp, tr in itertools.product(s_ps, s_rs, t_ps, t_rs)]


@dataclass
class SweepRow:
    config: FlowConfig
    p_loss: float
    flushes: int


def sweep(configs: Iterable[FlowConfig], trace: Sequence[Arrival]) -> list:
    configs = list(configs)
    if not configs:
        raise InputError("empty configuration grid")
    trace = [Arrival(*a) for a in trace]
    rows = []
    for cfg in configs:
        r = simulate(cfg, trace)
        rows.append(SweepRow(cfg, r.p_loss, r.flushes))
    return rows


SWEEP_HEADER = ["s_p", "s_r", "t_p", "t_r", "p_loss", "flushes"]


def write_sweep_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_HEADER)
        for r in rows:
            c = r.config
            w.writerow([c.s_p, c.s_r, c.t_p, c.t_r, repr(r.p_loss), r.flushes])


# -- trace files: "time_ms core_id bytes" per line ----------------------------

def _num(s):
    v = float(s)
    return int(v) if v.is_integer() and "." not in s and "e" not in s.lower() else v


def read_trace(path) -> list:
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 3:
            raise FormatError(f"trace line {lineno}: expected 'time_ms core_id bytes'")
        try:
            out.append(Arrival(_num(parts[0]), int(parts[1]), int(parts[2])))
        except ValueError:
            raise FormatError(f"trace line {lineno}: not numeric") from None
    return out


def write_trace(trace, path) -> None:
    with open(path, "w") as fh:
        fh.write("# time_ms core_id bytes\n")
        for a in trace:
            fh.write(f"{a[0]} {a[1]} {a[2]}\n")
