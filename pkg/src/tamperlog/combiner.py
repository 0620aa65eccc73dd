"""XOR MAC combiner: per-message tags under fresh keys folded into one tag."""
from __future__ import annotations

from typing import Callable, Sequence

from .errors import StructuralError
from .prf import DEFAULT_ROUNDS, Key128, Tag, chaskey_mac


def combine(a: Tag, b: Tag) -> Tag:
    if a.tau != b.tau:
        raise StructuralError(f"tag length mismatch: {a.tau} vs {b.tau}")
    return Tag(a.value ^ b.value, a.tau)


def uncombine(z: Tag, y: Tag) -> Tag:
    """Inverse of :func:`combine`; XOR is its own inverse."""
    return combine(z, y)


class Combiner:
    """A MAC ``G`` paired with the XOR combine operator.

    ``mac`` defaults to Chaskey-12 with a ``tau``-bit output; any callable
    ``(key, message) -> Tag`` works (the game harnesses plug in truncated MACs).
    """

    def __init__(self, tau: int = 64, rounds: int = DEFAULT_ROUNDS,
                 mac: Callable[[Key128, bytes], Tag] | None = None):
        self.tau = tau
        self.rounds = rounds
        self._mac = mac

    def mac(self, key: Key128, message: bytes) -> Tag:
        if self._mac is not None:
            return self._mac(key, message)
        return chaskey_mac(key, message, self.rounds, self.tau)

    combine = staticmethod(combine)
    uncombine = staticmethod(uncombine)

    def step(self, tag: Tag, key: Key128, message: bytes) -> Tag:
        return combine(tag, self.mac(key, message))

    def aggregate(self, keys: Sequence[Key128], messages: Sequence[bytes]) -> Tag:
        if len(keys) != len(messages):
            raise StructuralError(f"{len(keys)} keys for {len(messages)} messages")
        tag = Tag.zero(self.tau)
        for key, message in zip(keys, messages):
            tag = self.step(tag, key, message)
        return tag


def aggregate(keys: Sequence[Key128], messages: Sequence[bytes], tau: int = 64,
              rounds: int = DEFAULT_ROUNDS) -> Tag:
    return Combiner(tau, rounds).aggregate(keys, messages)
