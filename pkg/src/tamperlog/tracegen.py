"""Deterministic synthetic audit-event streams (a stand-in for kernel capture)."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

from .encoder import AuditEvent, SchemaTable, default_schema, encode
from .errors import ConfigError, FormatError
from .flow import Arrival

PROFILES = ("constant", "burst", "ramp")

# rough mail-server mix: lots of small file I/O, some metadata churn
MAIL_MIX = [
    ("openat", 14), ("read", 22), ("write", 22), ("close", 14), ("unlink", 4),
    ("mkdir", 1), ("chdir", 1), ("rmdir", 1), ("pread64", 4), ("pwrite64", 4),
    ("connect", 2), ("sendto", 3), ("recvfrom", 3), ("clone", 1), ("execve", 1),
    ("mmap", 2), ("chmod", 1),
]
_PATH_CALLS = {"open", "openat", "unlink", "unlinkat", "mkdir", "rmdir", "chdir", "chmod", "execve"}
_DIRS = ["/var/mail", "/tmp", "/etc", "/usr/lib", "/home/u"]


@dataclass(frozen=True)
class TraceSpec:
    duration: float = 1.0  # seconds
    rate: float = 1000.0  # events per second, all cores together
    n_cores: int = 4
    profile: str = "constant"
    dup_rate: float = 0.0
    seed: int = 0
    n_pids: int = 16

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ConfigError(f"profile must be one of {PROFILES}")
        if self.duration <= 0 or self.rate <= 0 or self.n_cores < 1:
            raise ConfigError("duration, rate and n_cores must be positive")
        if not 0 <= self.dup_rate < 1:
            raise ConfigError("dup_rate must be in [0, 1)")


def _intensity(spec: TraceSpec, t: float) -> float:
    """Relative rate multiplier at time t; integrates to ~1 over the run."""
    if spec.profile == "constant":
        return 1.0
    if spec.profile == "ramp":
        return 0.2 + 1.6 * t / spec.duration
    # 100 ms bursts at 4x every 500 ms, quieter (0.25x) in between
    return 4.0 if (t % 0.5) < 0.1 else 0.25


def _peak(spec):
    return {"constant": 1.0, "ramp": 1.8, "burst": 4.0}[spec.profile]


def _fresh_event(rng, schema, names, weights, core, t_ns, pid):
    s = schema.by_name(rng.choices(names, weights)[0])
    args = tuple(rng.getrandbits(min(8 * w, 31)) for w in s.widths)
    var = b""
    if s.name in _PATH_CALLS:
        var = f"{rng.choice(_DIRS)}/f{rng.getrandbits(16):04x}".encode()
    elif s.name in ("sendto", "recvfrom"):
        var = rng.randbytes(rng.randint(0, 16))
    return AuditEvent(s.syscall_id, pid, t_ns, core, args, var)


def generate(spec: TraceSpec, schema: SchemaTable | None = None) -> list:
    """Events sorted by timestamp (ns). Arrivals per core follow a thinned
    Poisson process; duplicates copy the core's latest fresh event."""
    schema = schema or default_schema()
    mix = [(n, w) for n, w in MAIL_MIX if n in schema._by_name]
    names, weights = [n for n, _ in mix], [w for _, w in mix]
    rng = random.Random(spec.seed)
    per_core = spec.rate / spec.n_cores
    events = []
    for core in range(spec.n_cores):
        crng = random.Random(rng.getrandbits(64))
        pids = [1000 + core * 100 + i for i in range(spec.n_pids)]
        lam = per_core * _peak(spec)
        t, last = 0.0, None
        while True:
            t += crng.expovariate(lam)
            if t >= spec.duration:
                break
            if crng.random() * _peak(spec) > _intensity(spec, t):
                continue
            t_ns = int(t * 1e9)
            if last is not None and crng.random() < spec.dup_rate:
                ev = AuditEvent(last.syscall_id, last.pid, t_ns, core, last.fixed_args, last.var_args)
            else:
                ev = last = _fresh_event(crng, schema, names, weights, core, t_ns, crng.choice(pids))
            events.append(ev)
    events.sort(key=lambda e: (e.timestamp, e.core_id))
    return events


def to_arrivals(events, schema: SchemaTable | None = None) -> list:
    """Flow-control arrivals ``(time_ms, core, wire bytes)`` for encoded events."""
    schema = schema or default_schema()
    return [Arrival(e.timestamp / 1e6, e.core_id, encode(e, schema).wire_length) for e in events]


def event_to_json(e: AuditEvent) -> str:
    return json.dumps({"t": e.timestamp, "core": e.core_id, "pid": e.pid, "sc": e.syscall_id,
                       "args": list(e.fixed_args), "var": e.var_args.hex()}, separators=(",", ":"))


def event_from_json(line: str) -> AuditEvent:
    d = json.loads(line)
    return AuditEvent(d["sc"], d["pid"], d["t"], d["core"], tuple(d["args"]), bytes.fromhex(d["var"]))


def write_events(events, path) -> None:
    with open(path, "w") as fh:
        for e in events:
            fh.write(event_to_json(e) + "\n")


def read_events(path) -> list:
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            out.append(event_from_json(line))
        except (ValueError, KeyError, TypeError) as exc:
            raise FormatError(f"event trace line {lineno}: {exc}") from None
    return out
