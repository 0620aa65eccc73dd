"""End-to-end signing: reduce -> encode -> sign per core -> buffer -> archive."""
from __future__ import annotations

from dataclasses import dataclass

from .archive import KeyFile, LogArchive
from .encoder import SchemaTable, default_schema, encode
from .flow import KB, MB, Arrival, FlowConfig, LossReport, simulate
from .pipeline import Pipeline
from .reducer import ShardedReducer


def default_flow(n_cores: int) -> FlowConfig:
    return FlowConfig(s_p=32 * KB, s_r=64 * MB, t_p=200, t_r=1000, n_cores=n_cores)


@dataclass
class SignResult:
    archive: LogArchive
    loss: LossReport | None
    reduction: tuple | None  # (seen, kept, dropped, evictions)
    signed: int


def sign_events(events, key: KeyFile, schema: SchemaTable | None = None, reduce: str | None = None,
                flow: FlowConfig | None = None, reducer_capacity: int = 65_536) -> SignResult:
    """Sign ``events`` and package what survives buffering into an archive.

    Every record is signed when it is produced. The buffering model then
    decides which records reach storage; lost records leave gaps that the
    auditor reports as tampering past the last good checkpoint.
    ``reduce`` is None, ``"fixed"`` or ``"dynamic"``.
    """
    schema = schema or default_schema()
    reduction = None
    if reduce:
        red = ShardedReducer(key.n_cores, capacity=reducer_capacity, dynamic=reduce == "dynamic")
        events = red.reduce(events)
        reduction = red.stats()
    pipe = Pipeline(key.master_seed, key.n_cores, key.cadence, key.tau, key.rounds)
    records = [encode(e, schema) for e in events]
    for rec in records:
        pipe.ingest(rec)
    loss = None
    if flow is not None:
        arrivals = [Arrival(e.timestamp / 1e6, r.core_id, r.wire_length) for e, r in zip(events, records)]
        loss = simulate(flow, arrivals, track=True)
        stored = [r for r, ok in zip(records, loss.delivered) if ok]
    else:
        stored = records
    pipe.finalize()
    archive = LogArchive(key.tau, key.n_cores, key.cadence, key.rounds, schema.digest(), stored,
                         [list(c) for c in pipe.checkpoints], pipe.final_tags())
    return SignResult(archive, loss, reduction, len(records))
