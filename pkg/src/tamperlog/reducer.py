"""Pre-signing log reduction: drop repeats of (pid, syscall, args) seen within
a time window, tracked in a bounded LRU map."""
from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass
from typing import NamedTuple

from .encoder import AuditEvent
from .errors import InputError
from .prf import mac_int

log = logging.getLogger(__name__)

FIXED_WINDOW = 1.0
DEFAULT_CAPACITY = 65_536
# public, fixed key: the digest only needs to be stable, not secret
_DIGEST_KEY = b"tamperlog:reduce"


class ReductionKey(NamedTuple):
    pid: int
    syscall_id: int
    args_digest: int


def args_bytes(event: AuditEvent) -> bytes:
    fixed = b"".join(int(a).to_bytes(8, "little") for a in event.fixed_args)
    return len(event.fixed_args).to_bytes(2, "little") + fixed + bytes(event.var_args)


def reduction_key(event: AuditEvent) -> ReductionKey:
    return ReductionKey(event.pid, event.syscall_id, mac_int(_DIGEST_KEY, args_bytes(event), 12, 64))


def window(t0: float, t1: float) -> float:
    """Adaptive window from two consecutive sightings of the same event."""
    if t1 < t0:
        raise InputError(f"timestamps go backwards: {t0} > {t1}")
    return min(1, 2 * (t1 - t0) + 0.001)


@dataclass
class _Entry:
    last_kept: float
    last_seen: float
    window: float


@dataclass
class ReducerStats:
    seen: int = 0
    kept: int = 0
    dropped: int = 0
    evictions: int = 0


class Reducer:
    """One shard of the reduction map (one per core).

    In fixed mode the window is always 1 s. In dynamic mode each key carries
    its own window, recomputed from the gap between its two latest sightings
    and applied to the next one; a new key starts at 1 s.
    Timestamps are seconds from the event records, never the wall clock.
    """

    def __init__(self, capacity: int = DEFAULT_CAPACITY, dynamic: bool = False,
                 fixed_window: float = FIXED_WINDOW):
        if capacity < 1:
            raise InputError("capacity must be positive")
        if not 0 < fixed_window <= 1:
            raise InputError("window must lie in (0, 1]")
        self.capacity = capacity
        self.dynamic = dynamic
        self.fixed_window = fixed_window
        self.lru: OrderedDict = OrderedDict()
        self.stats = ReducerStats()
        self._last_ts = None

    @property
    def t_w(self) -> float:
        return self.fixed_window

    def keep(self, key, now: float) -> bool:
        """Record a sighting of ``key`` at ``now``; True if the event survives."""
        st = self.stats
        st.seen += 1
        if self._last_ts is not None and now < self._last_ts:
            log.warning("timestamp %s precedes previous %s", now, self._last_ts)
        self._last_ts = now
        entry = self.lru.get(key)
        if entry is not None:
            self.lru.move_to_end(key)
            w = entry.window if self.dynamic else self.fixed_window
            if self.dynamic:
                entry.window = window(entry.last_seen, now) if now >= entry.last_seen else entry.window
            entry.last_seen = now
            if now - entry.last_kept <= w:
                st.dropped += 1
                return False
            entry.last_kept = now
        else:
            self.lru[key] = _Entry(now, now, self.fixed_window)
            if len(self.lru) > self.capacity:
                self.lru.popitem(last=False)
                st.evictions += 1
        st.kept += 1
        return True

    def filter(self, event: AuditEvent, now: float | None = None) -> bool:
        if now is None:
            now = event.timestamp / 1e9
        return self.keep(reduction_key(event), now)

    def __len__(self):
        return len(self.lru)


def filter_event(state: Reducer, event: AuditEvent) -> bool:
    return state.filter(event)


def stats(state: Reducer):
    s = state.stats
    return s.seen, s.kept, s.dropped, s.evictions


class ShardedReducer:
    """Per-core reducers, matching the per-core signing layout."""

    def __init__(self, n_cores: int, **kw):
        self.shards = [Reducer(**kw) for _ in range(n_cores)]

    def filter(self, event: AuditEvent) -> bool:
        return self.shards[event.core_id].filter(event)

    def reduce(self, events):
        return [e for e in events if self.filter(e)]

    def stats(self):
        totals = [0, 0, 0, 0]
        for sh in self.shards:
            for i, v in enumerate(stats(sh)):
                totals[i] += v
        return tuple(totals)
