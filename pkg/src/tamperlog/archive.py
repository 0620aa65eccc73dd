"""Binary file formats: the signed log archive and the keyfile.

All integers are little-endian. Archive layout::

    header      magic "XLOG" | u16 version | u16 tau | u32 N | u32 cadence
                | u8 rounds | 3 reserved bytes | 8-byte schema digest
    body        u64 frame count, then frames: u32 length | u32 core_id | payload
    checkpoints u32 line count, then per line: u32 line id | u32 count |
                count x (u64 index, bit 63 = terminal | tau/8-byte tag)
    trailer     u32 line count, then per line: u32 line id | tau/8-byte final tag

Keyfile::

    magic "XLKY" | u16 version | u16 tau | u32 N | u32 cadence | u8 rounds
    | 3 reserved bytes | 16-byte master seed
"""
from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from pathlib import Path

from .auditor import AuditInput
from .encoder import EncodedRecord
from .errors import FormatError
from .prf import Tag
from .xlog import Checkpoint

ARCHIVE_MAGIC = b"XLOG"
KEY_MAGIC = b"XLKY"
VERSION = 1
_HEADER = struct.Struct("<4sHHIIB3s8s")
_KEY = struct.Struct("<4sHHIIB3s16s")
_FRAME = struct.Struct("<II")
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")
_TERMINAL = 1 << 63


@dataclass
class KeyFile:
    master_seed: bytes
    n_cores: int
    tau: int = 64
    cadence: int = 1024
    rounds: int = 12

    def to_bytes(self) -> bytes:
        return _KEY.pack(KEY_MAGIC, VERSION, self.tau, self.n_cores, self.cadence,
                         self.rounds, b"\0" * 3, self.master_seed)

    @classmethod
    def from_bytes(cls, data: bytes) -> "KeyFile":
        if len(data) != _KEY.size:
            raise FormatError(f"keyfile must be {_KEY.size} bytes, got {len(data)}")
        magic, ver, tau, n, cadence, rounds, _, seed = _KEY.unpack(data)
        if magic != KEY_MAGIC:
            raise FormatError("not a keyfile (bad magic)", 0)
        if ver != VERSION:
            raise FormatError(f"unsupported keyfile version {ver}", 4)
        return cls(seed, n, tau, cadence, rounds)

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "KeyFile":
        return cls.from_bytes(Path(path).read_bytes())


@dataclass
class LogArchive:
    tau: int
    n_cores: int
    cadence: int
    rounds: int = 12
    schema_hash: bytes = bytes(8)
    records: list = field(default_factory=list)  # EncodedRecord, in stored order
    checkpoints: list = field(default_factory=list)  # per line
    finals: list = field(default_factory=list)  # per line Tag

    def records_by_line(self) -> list:
        out = [[] for _ in range(self.n_cores)]
        for r in self.records:
            if not 0 <= r.core_id < self.n_cores:
                raise FormatError(f"frame for core {r.core_id} in a {self.n_cores}-line archive")
            out[r.core_id].append(r)
        return out

    def to_audit_input(self, master_seed: bytes) -> AuditInput:
        return AuditInput(self.records_by_line(), [list(c) for c in self.checkpoints],
                          list(self.finals), master_seed, self.n_cores, self.tau,
                          self.cadence, self.rounds)

    @classmethod
    def from_audit_input(cls, audit: AuditInput, schema_hash: bytes = bytes(8)) -> "LogArchive":
        records = [r if isinstance(r, EncodedRecord) else EncodedRecord(bytes(r), c)
                   for c, line in enumerate(audit.records) for r in line]
        return cls(audit.tau, audit.n_cores, audit.cadence, audit.rounds, schema_hash,
                   records, [list(c) for c in audit.checkpoints], list(audit.claimed_final))

    # -- serialization ------------------------------------------------------

    def to_bytes(self) -> bytes:
        tb = self.tau // 8
        out = io.BytesIO()
        out.write(_HEADER.pack(ARCHIVE_MAGIC, VERSION, self.tau, self.n_cores, self.cadence,
                               self.rounds, b"\0" * 3, self.schema_hash))
        out.write(_U64.pack(len(self.records)))
        for r in self.records:
            out.write(_FRAME.pack(len(r.mac_input), r.core_id))
            out.write(r.mac_input)
        out.write(_U32.pack(len(self.checkpoints)))
        for line, cps in enumerate(self.checkpoints):
            out.write(_U32.pack(line) + _U32.pack(len(cps)))
            for cp in cps:
                out.write(_U64.pack(cp.index | (_TERMINAL if cp.terminal else 0)))
                out.write(cp.encrypted_tag.value.to_bytes(tb, "little"))
        out.write(_U32.pack(len(self.finals)))
        for line, tag in enumerate(self.finals):
            out.write(_U32.pack(line) + tag.value.to_bytes(tb, "little"))
        return out.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "LogArchive":
        r = _Reader(data)
        magic, ver, tau, n, cadence, rounds, _, schema_hash = r.unpack(_HEADER)
        if magic != ARCHIVE_MAGIC:
            raise FormatError("not a log archive (bad magic)", 0)
        if ver != VERSION:
            raise FormatError(f"unsupported archive version {ver}", 4)
        if tau % 8 or not tau:
            raise FormatError(f"bad tag length {tau}", 6)
        tb = tau // 8
        records = []
        for _ in range(r.unpack(_U64)[0]):
            length, core = r.unpack(_FRAME)
            records.append(EncodedRecord(r.take(length), core))
        checkpoints = []
        for expect in range(r.unpack(_U32)[0]):
            line, count = r.unpack(_U32)[0], r.unpack(_U32)[0]
            if line != expect:
                raise FormatError(f"checkpoint section for line {line}, expected {expect}", r.pos)
            cps = []
            for _ in range(count):
                raw = r.unpack(_U64)[0]
                tag = Tag(int.from_bytes(r.take(tb), "little"), tau)
                cps.append(Checkpoint(raw & ~_TERMINAL, tag, bool(raw & _TERMINAL)))
            checkpoints.append(cps)
        finals = []
        for expect in range(r.unpack(_U32)[0]):
            line = r.unpack(_U32)[0]
            if line != expect:
                raise FormatError(f"trailer entry for line {line}, expected {expect}", r.pos)
            finals.append(Tag(int.from_bytes(r.take(tb), "little"), tau))
        if r.pos != len(data):
            raise FormatError("trailing bytes after archive trailer", r.pos)
        if len(checkpoints) != n or len(finals) != n:
            raise FormatError(f"archive declares {n} lines but stores {len(checkpoints)}/{len(finals)}")
        return cls(tau, n, cadence, rounds, schema_hash, records, checkpoints, finals)

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> "LogArchive":
        return cls.from_bytes(Path(path).read_bytes())


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError(f"archive truncated: wanted {n} bytes", self.pos)
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, st: struct.Struct):
        return st.unpack(self.take(st.size))
