"""Chaskey MAC and the fixed-domain PRF used for key/state/mask evolution.

Keys are 16-byte ``bytes`` (four little-endian 32-bit words). Tags are
:class:`Tag` values; a 64-bit tag is the low-order half of the 128-bit one.
"""
from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from functools import lru_cache

from .errors import ConfigError

KEY_BYTES = 16
VALID_ROUNDS = (8, 12)
VALID_TAUS = (64, 128)
DEFAULT_ROUNDS = 12

_M32 = 0xFFFFFFFF
_WORDS = struct.Struct("<4I")

Key128 = bytes


@dataclass(frozen=True, slots=True)
class Tag:
    value: int
    tau: int

    def __post_init__(self):
        if self.tau <= 0 or self.tau % 8:
            raise ConfigError(f"tag length must be a positive multiple of 8, got {self.tau}")
        if self.value < 0 or self.value >> self.tau:
            raise ConfigError(f"tag value does not fit in {self.tau} bits")

    @classmethod
    def zero(cls, tau: int) -> "Tag":
        return cls(0, tau)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Tag":
        return cls(int.from_bytes(data, "little"), 8 * len(data))

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(self.tau // 8, "little")

    def truncate(self, tau: int) -> "Tag":
        if tau > self.tau:
            raise ConfigError(f"cannot widen a {self.tau}-bit tag to {tau} bits")
        return Tag(self.value & ((1 << tau) - 1), tau)

    def __repr__(self):
        return f"Tag({self.value:0{self.tau // 4}x}, tau={self.tau})"


def _check_key(key: bytes) -> None:
    if len(key) != KEY_BYTES:
        raise ConfigError(f"key must be {KEY_BYTES} bytes, got {len(key)}")


def times_two(words):
    """Chaskey subkey doubling in GF(2^128), on little-endian words."""
    w0, w1, w2, w3 = words
    return (
        ((w0 << 1) & _M32) ^ (0x87 if w3 >> 31 else 0),
        ((w1 << 1) & _M32) | (w0 >> 31),
        ((w2 << 1) & _M32) | (w1 >> 31),
        ((w3 << 1) & _M32) | (w2 >> 31),
    )


def _permute8(v0, v1, v2, v3):
    for _ in range(8):
        v0 = (v0 + v1) & _M32
        v1 = ((v1 << 5) | (v1 >> 27)) & _M32 ^ v0
        v0 = ((v0 << 16) | (v0 >> 16)) & _M32
        v2 = (v2 + v3) & _M32
        v3 = ((v3 << 8) | (v3 >> 24)) & _M32 ^ v2
        v0 = (v0 + v3) & _M32
        v3 = ((v3 << 13) | (v3 >> 19)) & _M32 ^ v0
        v2 = (v2 + v1) & _M32
        v1 = ((v1 << 7) | (v1 >> 25)) & _M32 ^ v2
        v2 = ((v2 << 16) | (v2 >> 16)) & _M32
    return v0, v1, v2, v3


def _permute12(v0, v1, v2, v3):
    for _ in range(12):
        v0 = (v0 + v1) & _M32
        v1 = ((v1 << 5) | (v1 >> 27)) & _M32 ^ v0
        v0 = ((v0 << 16) | (v0 >> 16)) & _M32
        v2 = (v2 + v3) & _M32
        v3 = ((v3 << 8) | (v3 >> 24)) & _M32 ^ v2
        v0 = (v0 + v3) & _M32
        v3 = ((v3 << 13) | (v3 >> 19)) & _M32 ^ v0
        v2 = (v2 + v1) & _M32
        v1 = ((v1 << 7) | (v1 >> 25)) & _M32 ^ v2
        v2 = ((v2 << 16) | (v2 >> 16)) & _M32
    return v0, v1, v2, v3


_PERMUTATIONS = {8: _permute8, 12: _permute12}


@lru_cache(maxsize=4096)
def _subkeys(key: bytes):
    k = _WORDS.unpack(key)
    k1 = times_two(k)
    return k, k1, times_two(k1)


def _chaskey_words_py(key: bytes, message: bytes, rounds: int = DEFAULT_ROUNDS):
    """Raw Chaskey: the four output words before truncation."""
    permute = _PERMUTATIONS[rounds]
    k, k1, k2 = _subkeys(key)
    v0, v1, v2, v3 = k
    n = len(message)
    # every block but the last goes through the plain absorb path
    last = ((n - 1) // 16) * 16 if n else 0
    unpack = _WORDS.unpack_from
    for off in range(0, last, 16):
        m0, m1, m2, m3 = unpack(message, off)
        v0, v1, v2, v3 = permute(v0 ^ m0, v1 ^ m1, v2 ^ m2, v3 ^ m3)
    tail = message[last:]
    if n and len(tail) == 16:
        l0, l1, l2, l3 = k1
    else:
        tail = tail + b"\x01" + bytes(15 - len(tail))
        l0, l1, l2, l3 = k2
    m0, m1, m2, m3 = _WORDS.unpack(tail)
    v0, v1, v2, v3 = permute(v0 ^ m0 ^ l0, v1 ^ m1 ^ l1, v2 ^ m2 ^ l2, v3 ^ m3 ^ l3)
    return v0 ^ l0, v1 ^ l1, v2 ^ l2, v3 ^ l3


def _chaskey_words_jit(key: bytes, message: bytes, rounds: int = DEFAULT_ROUNDS):
    """Same contract as the pure path, run through the compiled kernel."""
    k, k1, k2 = _subkeys(key)
    return _kernel(*k, *k1, *k2, _frombuffer(message, _uint8), rounds)


try:
    if os.environ.get("TAMPERLOG_PURE"):
        raise ImportError("pure-Python path requested")
    from numpy import frombuffer as _frombuffer, uint8 as _uint8

    from ._accel import chaskey_kernel as _kernel
    ACCELERATED = True
except ImportError:
    ACCELERATED = False

chaskey_words = _chaskey_words_jit if ACCELERATED else _chaskey_words_py


def _validate(rounds, tau):
    if rounds not in VALID_ROUNDS:
        raise ConfigError(f"rounds must be one of {VALID_ROUNDS}, got {rounds!r}")
    if tau not in VALID_TAUS:
        raise ConfigError(f"tau must be one of {VALID_TAUS}, got {tau!r}")


def chaskey_mac(key: Key128, message: bytes, rounds: int = DEFAULT_ROUNDS, tau: int = 128) -> Tag:
    _validate(rounds, tau)
    _check_key(key)
    v0, v1, v2, v3 = chaskey_words(key, bytes(message), rounds)
    if tau == 64:
        return Tag(v0 | (v1 << 32), 64)
    return Tag(v0 | (v1 << 32) | (v2 << 64) | (v3 << 96), 128)


def mac_int(key: Key128, message: bytes, rounds: int = DEFAULT_ROUNDS, tau: int = 64) -> int:
    """Integer-valued MAC for hot paths; same bits as ``chaskey_mac(...).value``."""
    v0, v1, v2, v3 = chaskey_words(key, message, rounds)
    if tau == 64:
        return v0 | (v1 << 32)
    return v0 | (v1 << 32) | (v2 << 64) | (v3 << 96)


_SELECTORS = (b"\x00", b"\x01", b"\x02")


def prf_f(state: Key128, selector: int) -> Key128:
    """F_S(selector) for selector in {0, 1, 2}: 128-bit Chaskey-12 of one byte."""
    if selector not in (0, 1, 2):
        raise ConfigError(f"PRF selector must be 0, 1 or 2, got {selector!r}")
    _check_key(state)
    return _WORDS.pack(*chaskey_words(state, _SELECTORS[selector], 12))
