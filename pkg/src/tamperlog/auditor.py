"""Verification and forensics.

The auditor replays the signing procedure from the shared master seed,
compares the recomputed final tag with the claimed one, and uses the stored
encrypted checkpoints to find the longest prefix it can still vouch for.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace
from typing import Sequence

from .encoder import EncodedRecord
from .errors import InputError
from .prf import DEFAULT_ROUNDS, Key128, Tag, chaskey_words, mac_int
from .xlog import Checkpoint, derive_line_seed

_WORDS = struct.Struct("<4I")


class KeySchedule:
    """Lazily derived per-step keys and masks of one line.

    Step ``t`` signs with ``key(t)`` and then evolves the state, producing
    ``mask(t)``. The schedule does not depend on the messages, so one instance
    serves any number of candidate streams for the same line.
    """

    def __init__(self, key: Key128, state: Key128, tau: int = 64):
        self.tau = tau
        self._keys = [bytes(key)]
        self._masks = []
        self._state = bytes(state)
        self._tmask = (1 << tau) - 1

    def _extend(self, t: int):
        keys, masks, state = self._keys, self._masks, self._state
        while len(masks) <= t:
            v = chaskey_words(state, b"\x02", 12)
            masks.append((v[0] | (v[1] << 32) | (v[2] << 64) | (v[3] << 96)) & self._tmask)
            keys.append(_WORDS.pack(*chaskey_words(state, b"\x01", 12)))
            state = _WORDS.pack(*chaskey_words(state, b"\x00", 12))
        self._state = state

    def key(self, t: int) -> bytes:
        self._extend(t)
        return self._keys[t]

    def mask(self, t: int) -> int:
        self._extend(t)
        return self._masks[t]


@dataclass
class Replay:
    """Result of replaying one line: encrypted tags per index and the final tag."""

    encrypted: list  # encrypted[i-1] = X*_i
    terminal: dict  # index -> [X* of each terminal step taken at that index]
    final: Tag

    @property
    def xs(self):
        return self.encrypted


def _messages(records):
    return [r.mac_input if isinstance(r, EncodedRecord) else bytes(r) for r in records]


def replay(schedule: KeySchedule, messages: Sequence[bytes], terminal_at: Sequence[int] = (),
           rounds: int = DEFAULT_ROUNDS) -> Replay:
    """Exact replay of the signing procedure over ``messages``.

    Every step is taken with a mask, as in the auditor's Tag procedure; the
    line's key/state trajectory is the same whether or not it checkpointed.
    ``terminal_at`` lists record counts after which the line was sealed.
    """
    tau = schedule.tau
    pending = sorted(terminal_at)
    term: dict = {}
    step, p, tag = 0, 0, 0
    while p < len(pending) and pending[p] == 0:
        term.setdefault(0, []).append(schedule.mask(step))
        step += 1
        p += 1
    xs = []
    for i, m in enumerate(messages, 1):
        tag ^= mac_int(schedule.key(step), m, rounds, tau)
        xs.append(tag ^ schedule.mask(step))
        step += 1
        while p < len(pending) and pending[p] == i:
            term.setdefault(i, []).append(tag ^ schedule.mask(step))
            step += 1
            p += 1
    return Replay(xs, term, Tag(tag, tau))


def recompute_tags(line_seed, messages: Sequence[bytes], tau: int = 64,
                   rounds: int = DEFAULT_ROUNDS, terminal_at: Sequence[int] = ()):
    """``(X*_1..X*_v, T*)`` for a line whose initial ``(key, state)`` is ``line_seed``."""
    key, state = line_seed
    r = replay(KeySchedule(key, state, tau), _messages(messages), terminal_at, rounds)
    return [Tag(x, tau) for x in r.encrypted], r.final


@dataclass
class AuditInput:
    records: list  # per line: sequence of EncodedRecord or bytes
    checkpoints: list  # per line: sequence of Checkpoint
    claimed_final: list  # per line: Tag
    master_seed: Key128
    n_cores: int
    tau: int = 64
    cadence: int = 1
    rounds: int = DEFAULT_ROUNDS

    def __post_init__(self):
        if not (len(self.records) == len(self.checkpoints) == len(self.claimed_final) == self.n_cores):
            raise InputError("records, checkpoints and final tags must each have one entry per line")

    def copy(self) -> "AuditInput":
        return replace(self, records=[list(r) for r in self.records],
                       checkpoints=[list(c) for c in self.checkpoints],
                       claimed_final=list(self.claimed_final))

    @property
    def total_records(self) -> int:
        return sum(len(r) for r in self.records)


@dataclass
class LineVerdict:
    core_id: int
    status: str  # "intact" | "tampered"
    s: int
    record_count: int
    mismatch_index: int | None = None
    checkpoint_mismatches: list = field(default_factory=list)
    prefix_bytes: int = 0

    @property
    def intact(self) -> bool:
        return self.status == "intact"

    @property
    def prefix_length(self) -> int:
        return min(self.s, self.record_count)

    @property
    def extracted_prefix(self) -> range:
        return range(1, self.prefix_length + 1)

    def to_dict(self) -> dict:
        return {
            "line": self.core_id,
            "status": self.status,
            "records": self.record_count,
            "s": self.s,
            "prefix": [1, self.prefix_length] if self.prefix_length else [],
            "prefix_bytes": [0, self.prefix_bytes],
            "mismatch_index": self.mismatch_index,
            "checkpoint_mismatches": self.checkpoint_mismatches,
        }


@dataclass
class AuditVerdict:
    lines: list

    @property
    def intact(self) -> bool:
        return all(v.intact for v in self.lines)

    def __getitem__(self, core):
        return self.lines[core]

    def to_dict(self) -> dict:
        return {"status": "intact" if self.intact else "tampered",
                "lines": [v.to_dict() for v in self.lines]}


def _check_order(cps, core):
    prev = None
    for cp in cps:
        key = (cp.index, cp.terminal)
        if prev is not None and (key < prev or (key == prev and not cp.terminal)):
            raise InputError(f"line {core}: checkpoints out of order at index {cp.index}")
        prev = key


class Auditor:
    """Holds per-line key schedules so repeated verifications share derivation work."""

    def __init__(self, master_seed: Key128, tau: int = 64, rounds: int = DEFAULT_ROUNDS):
        self.master_seed = bytes(master_seed)
        self.tau = tau
        self.rounds = rounds
        self._schedules = {}

    def schedule(self, core: int) -> KeySchedule:
        sch = self._schedules.get(core)
        if sch is None:
            key, state = derive_line_seed(self.master_seed, core)
            sch = self._schedules[core] = KeySchedule(key, state, self.tau)
        return sch

    def verify_line(self, core: int, records, checkpoints: Sequence[Checkpoint],
                    claimed_final: Tag) -> LineVerdict:
        _check_order(checkpoints, core)
        msgs = _messages(records)
        terminal_at = [cp.index for cp in checkpoints if cp.terminal]
        rep = replay(self.schedule(core), msgs, terminal_at, self.rounds)
        r = len(msgs)
        s = 0
        first_bad = None
        bad = []
        seen_terminal: dict = {}
        for cp in checkpoints:
            j = cp.index
            if cp.terminal:
                k = seen_terminal.get(j, 0)
                seen_terminal[j] = k + 1
                options = rep.terminal.get(j, [])
                expected = options[k] if k < len(options) else None
            else:
                expected = rep.encrypted[j - 1] if 1 <= j <= r else None
            if expected is not None and expected == cp.encrypted_tag.value \
                    and cp.encrypted_tag.tau == self.tau:
                s = max(s, j)
            else:
                bad.append(j)
                if first_bad is None:
                    first_bad = j
        intact = claimed_final.tau == self.tau and rep.final.value == claimed_final.value
        prefix = min(s, r)
        return LineVerdict(
            core_id=core,
            status="intact" if intact else "tampered",
            s=s,
            record_count=r,
            mismatch_index=None if intact and not bad else (first_bad if first_bad is not None else r),
            checkpoint_mismatches=bad,
            prefix_bytes=sum(len(m) for m in msgs[:prefix]),
        )

    def verify(self, audit: AuditInput) -> AuditVerdict:
        if bytes(audit.master_seed) != self.master_seed:
            raise InputError("audit input was produced under a different master seed")
        return AuditVerdict([
            self.verify_line(c, audit.records[c], audit.checkpoints[c], audit.claimed_final[c])
            for c in range(audit.n_cores)
        ])


def verify(audit: AuditInput, auditor: Auditor | None = None) -> AuditVerdict:
    if auditor is None:
        auditor = Auditor(audit.master_seed, audit.tau, audit.rounds)
    return auditor.verify(audit)


def from_pipeline(pipeline, records_by_line, master_seed: Key128) -> AuditInput:
    """Bundle an honest pipeline's output for the auditor."""
    return AuditInput(
        records=[list(r) for r in records_by_line],
        checkpoints=[list(c) for c in pipeline.checkpoints],
        claimed_final=pipeline.final_tags(),
        master_seed=master_seed,
        n_cores=pipeline.n_cores,
        tau=pipeline.tau,
        cadence=pipeline.cadence,
        rounds=pipeline.rounds,
    )


# -- attack mutators -------------------------------------------------------
# Each returns a fresh AuditInput; the original is left untouched.

def _require(audit: AuditInput, line: int):
    if audit.total_records == 0:
        raise InputError("cannot attack an empty log")
    if not 0 <= line < audit.n_cores:
        raise InputError(f"no line {line}")


def attack_truncate(audit: AuditInput, line: int, keep: int, present_checkpoint: bool = False) -> AuditInput:
    """Drop every record after the first ``keep`` on ``line``.

    Stored checkpoints beyond ``keep`` are removed too. With
    ``present_checkpoint`` the stored encrypted tag at ``keep`` is offered as
    the final tag, the move that defeats plaintext-tag schemes.
    """
    _require(audit, line)
    out = audit.copy()
    out.records[line] = out.records[line][:keep]
    out.checkpoints[line] = [cp for cp in out.checkpoints[line] if cp.index <= keep]
    if present_checkpoint:
        at = [cp for cp in audit.checkpoints[line] if cp.index == keep and not cp.terminal]
        if not at:
            raise InputError(f"no stored checkpoint at index {keep}")
        out.claimed_final[line] = at[0].encrypted_tag
    return out


def _set_record(records, i, payload):
    r = records[i]
    records[i] = EncodedRecord(payload, r.core_id) if isinstance(r, EncodedRecord) else payload


def attack_modify(audit: AuditInput, line: int, index: int, bit: int = 0) -> AuditInput:
    """Flip ``bit`` of record ``index`` (1-based) on ``line``."""
    _require(audit, line)
    out = audit.copy()
    recs = out.records[line]
    if not 1 <= index <= len(recs):
        raise InputError(f"record {index} out of range")
    payload = bytearray(_messages([recs[index - 1]])[0])
    if not payload:
        raise InputError("cannot flip a bit of an empty record")
    bit %= 8 * len(payload)
    payload[bit // 8] ^= 1 << (bit % 8)
    _set_record(recs, index - 1, bytes(payload))
    return out


def attack_delete(audit: AuditInput, line: int, index: int) -> AuditInput:
    _require(audit, line)
    out = audit.copy()
    del out.records[line][index - 1]
    return out


def attack_insert(audit: AuditInput, line: int, index: int, payload) -> AuditInput:
    """Insert ``payload`` so that it becomes record ``index`` (1-based)."""
    _require(audit, line)
    out = audit.copy()
    out.records[line].insert(index - 1, payload)
    return out


def attack_reorder(audit: AuditInput, line: int, index: int) -> AuditInput:
    """Swap records ``index`` and ``index + 1``."""
    _require(audit, line)
    out = audit.copy()
    recs = out.records[line]
    recs[index - 1], recs[index] = recs[index], recs[index - 1]
    return out


def attack_replay(audit: AuditInput, captured: AuditInput, line: int | None = None) -> AuditInput:
    """Splice a previously captured stream (records, checkpoints, final tag)
    over ``line``, or over every line when ``line`` is None."""
    _require(audit, 0 if line is None else line)
    if captured.total_records == 0:
        raise InputError("captured stream is empty")
    out = audit.copy()
    lines = range(min(audit.n_cores, captured.n_cores)) if line is None else [line]
    for c in lines:
        out.records[c] = list(captured.records[c])
        out.checkpoints[c] = list(captured.checkpoints[c])
        out.claimed_final[c] = captured.claimed_final[c]
    return out


def longest_common_prefix(a: Sequence[bytes], b: Sequence[bytes]) -> int:
    n = 0
    for x, y in zip(_messages(a), _messages(b)):
        if x != y:
            break
        n += 1
    return n
