"""Forward-secure signing lines: tag aggregation, key/state evolution and
encrypted tag checkpoints.

Each :class:`SigningState` holds one (key, state, tag) triple. After every
signed message the key and state are overwritten with ``F_S(1)`` and
``F_S(0)``; a checkpoint additionally stores the running tag XOR-ed with the
mask ``F_S(2)`` of the same update step.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

from .errors import ConfigError
from .prf import (DEFAULT_ROUNDS, KEY_BYTES, VALID_ROUNDS, Key128, Tag, chaskey_mac,
                  chaskey_words, mac_int, prf_f)

_WORDS = struct.Struct("<4I")
_SEL = (b"\x00", b"\x01", b"\x02")
_STATE_LABEL = b"\x10"
_KEY_LABEL = b"\x11"


@dataclass(frozen=True, slots=True)
class Checkpoint:
    """Encrypted tag ``X_j = T_j xor mask`` after ``index`` records.

    ``terminal`` marks a flush-time checkpoint whose mask comes from an extra
    update step taken without signing a record.
    """

    index: int
    encrypted_tag: Tag
    terminal: bool = False


def _f(state: bytes, selector: int) -> bytes:
    return _WORDS.pack(*chaskey_words(state, _SEL[selector], 12))


def _mask(state: bytes, tau: int) -> int:
    v0, v1, v2, v3 = chaskey_words(state, b"\x02", 12)
    full = v0 | (v1 << 32) | (v2 << 64) | (v3 << 96)
    return full & ((1 << tau) - 1)


def update(state: Key128, emit_mask: bool, tau: int = 64):
    """One evolution step: ``(F_S(1), F_S(0), mask or None)``.

    The returned key and state do not depend on ``emit_mask``.
    """
    new_state = prf_f(state, 0)
    new_key = prf_f(state, 1)
    mask = Tag(int.from_bytes(prf_f(state, 2), "little"), 128).truncate(tau) if emit_mask else None
    return new_key, new_state, mask


def derive_line_seed(master_seed: Key128, core_index: int):
    """Initial (key, state) of line ``core_index``, domain-separated by core."""
    core = struct.pack("<I", core_index)
    state = chaskey_mac(master_seed, _STATE_LABEL + core, 12, 128).to_bytes()
    key = chaskey_mac(master_seed, _KEY_LABEL + core, 12, 128).to_bytes()
    return key, state


class SigningState:
    """Single-writer signing line. Secret footprint: key, state and a
    128-bit tag slot, 48 bytes in total."""

    SECRET_BYTES = 3 * KEY_BYTES

    __slots__ = ("_key", "_state", "_tag", "index", "tau", "rounds", "core_id")

    def __init__(self, key: Key128, state: Key128, tau: int = 64,
                 rounds: int = DEFAULT_ROUNDS, core_id: int = 0):
        if len(key) != KEY_BYTES or len(state) != KEY_BYTES:
            raise ConfigError("key and state must be 16 bytes")
        if tau not in (64, 128):
            raise ConfigError(f"tau must be 64 or 128, got {tau!r}")
        if rounds not in VALID_ROUNDS:
            raise ConfigError(f"rounds must be one of {VALID_ROUNDS}, got {rounds!r}")
        self._key = bytes(key)
        self._state = bytes(state)
        self._tag = 0
        self.index = 0
        self.tau = tau
        self.rounds = rounds
        self.core_id = core_id

    @property
    def tag(self) -> Tag:
        return Tag(self._tag, self.tau)

    @property
    def secret_bytes(self) -> int:
        return self.SECRET_BYTES

    def snapshot(self):
        """Current (key, state): what an attacker sees after compromise."""
        return self._key, self._state

    def _evolve(self, emit_mask: bool):
        state = self._state
        mask = _mask(state, self.tau) if emit_mask else None
        self._key = _f(state, 1)
        self._state = _f(state, 0)
        return mask

    def sign(self, message: bytes, checkpoint: bool = False) -> Checkpoint | None:
        self._tag ^= mac_int(self._key, message, self.rounds, self.tau)
        self.index += 1
        mask = self._evolve(checkpoint)
        if mask is None:
            return None
        return Checkpoint(self.index, Tag(self._tag ^ mask, self.tau))

    def seal(self) -> Checkpoint:
        """Terminal checkpoint from one extra update step; the line stays usable."""
        mask = self._evolve(True)
        return Checkpoint(self.index, Tag(self._tag ^ mask, self.tau), terminal=True)

    def __repr__(self):
        return f"SigningState(core={self.core_id}, index={self.index}, tau={self.tau})"


def sign(line: SigningState, message: bytes, checkpoint: bool = False) -> Checkpoint | None:
    return line.sign(message, checkpoint)


def line_init(master_seed: Key128, core_index: int, n_cores: int | None = None,
              tau: int = 64, rounds: int = DEFAULT_ROUNDS) -> SigningState:
    if len(master_seed) != KEY_BYTES:
        raise ConfigError("master seed must be 16 bytes")
    if core_index < 0 or (n_cores is not None and core_index >= n_cores):
        raise ConfigError(f"core index {core_index} out of range for {n_cores} cores")
    key, state = derive_line_seed(master_seed, core_index)
    return SigningState(key, state, tau, rounds, core_index)
