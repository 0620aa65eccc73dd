"""Audit event encoding: ``pad(P1) || P2``.

P1 holds the fixed-width fields (syscall id, pid, timestamp, fixed args) and is
zero-padded to a 16-byte boundary; P2 is the raw variable-length argument
bytes. The fixed length is a function of the syscall id alone, so the
encoding is injective without any length prefix. The core id travels next to
the encoding and is never MACed.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import ParseError, SchemaError

BLOCK = 16
HEADER = struct.Struct("<IIQ")  # syscall_id, pid, timestamp_ns
SCHEMA_MAGIC = "tamperlog-schema"
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class AuditEvent:
    syscall_id: int
    pid: int
    timestamp: int
    core_id: int = 0
    fixed_args: tuple = ()
    var_args: bytes = b""


@dataclass(frozen=True)
class EncodedRecord:
    mac_input: bytes
    core_id: int

    @property
    def wire_length(self) -> int:
        # framed size: 4-byte length + 4-byte core id + payload
        return 8 + len(self.mac_input)


@dataclass(frozen=True)
class SyscallSchema:
    syscall_id: int
    name: str
    widths: tuple = ()

    @property
    def fixed_length(self) -> int:
        return HEADER.size + sum(self.widths)

    @property
    def padded_length(self) -> int:
        return padded_size(self.fixed_length)


def padded_size(n: int) -> int:
    return -(-n // BLOCK) * BLOCK


@dataclass
class SchemaTable:
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        self._by_name = {}
        for s in self.entries.values():
            if s.name in self._by_name:
                raise SchemaError(f"duplicate syscall name {s.name!r}")
            self._by_name[s.name] = s

    @classmethod
    def from_entries(cls, entries: Iterable[SyscallSchema]) -> "SchemaTable":
        table = {}
        for e in entries:
            if e.syscall_id in table:
                raise SchemaError(f"duplicate syscall id {e.syscall_id}")
            table[e.syscall_id] = e
        return cls(table)

    def __getitem__(self, syscall_id: int) -> SyscallSchema:
        try:
            return self.entries[syscall_id]
        except KeyError:
            raise SchemaError(f"unknown syscall id {syscall_id}") from None

    def __contains__(self, syscall_id) -> bool:
        return syscall_id in self.entries

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(sorted(self.entries.values(), key=lambda s: s.syscall_id))

    def by_name(self, name: str) -> SyscallSchema:
        try:
            return self._by_name[name]
        except KeyError:
            raise SchemaError(f"unknown syscall name {name!r}") from None

    def to_text(self) -> str:
        lines = [f"{SCHEMA_MAGIC} {SCHEMA_VERSION}"]
        for s in self:
            widths = ",".join(map(str, s.widths)) or "-"
            lines.append(f"{s.syscall_id} {s.name} {widths}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SchemaTable":
        lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        if not lines or lines[0].split() != [SCHEMA_MAGIC, str(SCHEMA_VERSION)]:
            raise SchemaError(f"schema must start with '{SCHEMA_MAGIC} {SCHEMA_VERSION}'")
        entries = []
        for lineno, ln in enumerate(lines[1:], 2):
            parts = ln.split()
            if len(parts) != 3:
                raise SchemaError(f"schema line {lineno}: expected 'id name widths'")
            sid, name, widths = parts
            w = () if widths == "-" else tuple(int(x) for x in widths.split(","))
            if any(x <= 0 for x in w):
                raise SchemaError(f"schema line {lineno}: widths must be positive")
            entries.append(SyscallSchema(int(sid), name, w))
        return cls.from_entries(entries)

    @classmethod
    def load(cls, path) -> "SchemaTable":
        return cls.from_text(Path(path).read_text())

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    def digest(self) -> bytes:
        """8-byte fingerprint stored in archive headers."""
        return hashlib.sha256(self.to_text().encode()).digest()[:8]


# x86_64 syscall numbers; widths in bytes for the fixed-size arguments.
_DEFAULT = [
    (0, "read", (4, 8)),
    (1, "write", (4, 8)),
    (2, "open", (4, 4)),
    (3, "close", (4,)),
    (9, "mmap", (8, 8, 4, 4)),
    (10, "mprotect", (8, 8, 4)),
    (17, "pread64", (4, 8, 8)),
    (18, "pwrite64", (4, 8, 8)),
    (32, "dup", (4,)),
    (33, "dup2", (4, 4)),
    (41, "socket", (4, 4, 4)),
    (42, "connect", (4, 4)),
    (43, "accept", (4,)),
    (44, "sendto", (4, 8, 4)),
    (45, "recvfrom", (4, 8, 4)),
    (56, "clone", (8,)),
    (58, "vfork", ()),
    (59, "execve", ()),
    (60, "exit", (4,)),
    (62, "kill", (4, 4)),
    (80, "chdir", ()),
    (83, "mkdir", (4,)),
    (84, "rmdir", ()),
    (87, "unlink", ()),
    (90, "chmod", (4,)),
    (101, "ptrace", (8, 4)),
    (105, "setuid", (4,)),
    (106, "setgid", (4,)),
    (257, "openat", (4, 4, 4)),
    (263, "unlinkat", (4, 4)),
]


def default_schema() -> SchemaTable:
    return SchemaTable.from_entries(SyscallSchema(i, n, w) for i, n, w in _DEFAULT)


def encode_p1(event: AuditEvent, schema: SchemaTable) -> bytes:
    s = schema[event.syscall_id]
    if len(event.fixed_args) != len(s.widths):
        raise SchemaError(f"{s.name} takes {len(s.widths)} fixed args, got {len(event.fixed_args)}")
    parts = [HEADER.pack(event.syscall_id, event.pid, event.timestamp)]
    for value, width in zip(event.fixed_args, s.widths):
        try:
            parts.append(int(value).to_bytes(width, "little"))
        except OverflowError:
            raise SchemaError(f"{s.name}: argument {value} does not fit in {width} bytes") from None
    return b"".join(parts)


def pad(p1: bytes) -> bytes:
    return p1 + bytes(padded_size(len(p1)) - len(p1))


def encode(event: AuditEvent, schema: SchemaTable) -> EncodedRecord:
    p1 = encode_p1(event, schema)
    return EncodedRecord(pad(p1) + bytes(event.var_args), event.core_id)


def split(mac_input: bytes, schema: SchemaTable):
    """Return ``(P1, P2)`` from a MAC input, validating length and padding."""
    if len(mac_input) < HEADER.size:
        raise ParseError(f"record shorter than the {HEADER.size}-byte header", len(mac_input))
    sid = int.from_bytes(mac_input[:4], "little")
    if sid not in schema:
        raise ParseError(f"unknown syscall id {sid}", 0)
    s = schema[sid]
    if len(mac_input) < s.padded_length:
        raise ParseError(f"{s.name} record needs {s.padded_length} fixed bytes", len(mac_input))
    p1 = mac_input[:s.fixed_length]
    padding = mac_input[s.fixed_length:s.padded_length]
    if any(padding):
        bad = s.fixed_length + next(i for i, b in enumerate(padding) if b)
        raise ParseError("nonzero padding byte", bad)
    return p1, mac_input[s.padded_length:]


def decode(record: EncodedRecord, schema: SchemaTable) -> AuditEvent:
    p1, p2 = split(record.mac_input, schema)
    sid, pid, ts = HEADER.unpack_from(p1)
    s = schema[sid]
    args, off = [], HEADER.size
    for w in s.widths:
        args.append(int.from_bytes(p1[off:off + w], "little"))
        off += w
    return AuditEvent(sid, pid, ts, record.core_id, tuple(args), bytes(p2))
