"""Security games as executable harnesses.

``game_fa`` runs the forward-authenticity game against the XLog protocol and
``game_forge`` the unforgeability game against the XOR combiner. Both accept
small tag lengths (e.g. 16 bits) so that win rates become measurable.

Adversaries are plain objects:

* FA game: ``choose(q, rng) -> (messages, sigma)`` and
  ``forge(state, key, xs, tag, sigma) -> (messages, tag)``
* forge game: ``choose(q, rng) -> (messages, sigma)`` and
  ``respond(sigma, tag) -> (messages, tag)``
"""
from __future__ import annotations

import random

from .errors import HarnessError
from .prf import DEFAULT_ROUNDS, Tag, mac_int
from .xlog import update


def truncated_mac(tau: int, rounds: int = DEFAULT_ROUNDS):
    """Chaskey G with a ``tau``-bit output (low-order bits), as an int."""
    base = 64 if tau <= 64 else 128
    mask = (1 << tau) - 1

    def g(key: bytes, message: bytes) -> int:
        return mac_int(key, message, rounds, base) & mask

    return g


def _messages(out, q=None):
    if not isinstance(out, tuple) or len(out) != 2:
        raise HarnessError("adversary must return a (messages, sigma/tag) pair")
    msgs, extra = out
    try:
        msgs = tuple(bytes(m) for m in msgs)
    except TypeError:
        raise HarnessError("messages must be a sequence of byte strings") from None
    if q is not None and len(msgs) != q:
        raise HarnessError(f"adversary produced {len(msgs)} messages, game expects {q}")
    return msgs, extra


def _as_int(tag, tau):
    if isinstance(tag, Tag):
        if tag.tau != tau:
            raise HarnessError(f"forged tag has {tag.tau} bits, game uses {tau}")
        return tag.value
    if isinstance(tag, int) and 0 <= tag < (1 << tau):
        return tag
    raise HarnessError("forged tag must be a Tag or an in-range int")


def tag_procedure(key0: bytes, state0: bytes, messages, tau: int, rounds: int = DEFAULT_ROUNDS,
                  encrypt_tags: bool = True):
    """Sign every message, encrypting every intermediate tag.

    Returns ``(xs, tag, key, state)``. With ``encrypt_tags=False`` the stored
    tags are the plaintext aggregates (the mask is the all-zero string).
    """
    g = truncated_mac(tau, rounds)
    key, state, tag = key0, state0, 0
    xs = []
    for m in messages:
        tag ^= g(key, m)
        key, state, mask = update(state, True, tau)
        xs.append(tag ^ mask.value if encrypt_tags else tag)
    return xs, tag, key, state


def game_fa(adversary, q: int, tau: int = 64, rng: random.Random | None = None,
            rounds: int = DEFAULT_ROUNDS, encrypt_tags: bool = True) -> bool:
    """One run of the FA game; True when the adversary wins."""
    rng = rng or random.Random()
    msgs, sigma = _messages(adversary.choose(q, rng), q)
    state0, key0 = rng.randbytes(16), rng.randbytes(16)
    xs, tag, key, state = tag_procedure(key0, state0, msgs, tau, rounds, encrypt_tags)
    forged, forged_tag = _messages(adversary.forge(state, key, list(xs), tag, sigma))
    forged_tag = _as_int(forged_tag, tau)
    # attacker must alter messages to win
    if len(forged) >= q and forged[:q] == msgs:
        return False
    _, tag_star, _, _ = tag_procedure(key0, state0, forged, tau, rounds, encrypt_tags)
    return tag_star == forged_tag


def game_forge(adversary, q: int, tau: int = 64, rng: random.Random | None = None,
               rounds: int = DEFAULT_ROUNDS) -> bool:
    """One run of the combiner unforgeability game; True when the adversary wins."""
    rng = rng or random.Random()
    g = truncated_mac(tau, rounds)
    msgs, sigma = _messages(adversary.choose(q, rng), q)
    keys = [rng.randbytes(16) for _ in msgs]
    tag = 0
    for k, m in zip(keys, msgs):
        tag ^= g(k, m)
    forged, forged_tag = _messages(adversary.respond(sigma, tag))
    forged_tag = _as_int(forged_tag, tau)
    if len(forged) > q:
        raise HarnessError(f"forgery has {len(forged)} messages, at most {q} allowed")
    agg = 0
    for k, m in zip(keys, forged):
        agg ^= g(k, m)
    return forged != msgs and agg == forged_tag


def win_count(game, adversary, trials: int, q: int, tau: int, seed: int = 0, **kw) -> int:
    rng = random.Random(seed)
    return sum(game(adversary, q, tau, rng, **kw) for _ in range(trials))


# -- reference adversaries --------------------------------------------------

def _random_messages(q, rng, size=24):
    return [rng.randbytes(size) for _ in range(q)]


class HonestReplay:
    """Hands back the original messages and tag: never an alteration."""

    def choose(self, q, rng):
        msgs = _random_messages(q, rng)
        return msgs, msgs

    def forge(self, state, key, xs, tag, sigma):
        return sigma, tag

    def respond(self, sigma, tag):
        return sigma, tag


class RandomTagForger:
    """Alters the first message and guesses the tag uniformly."""

    def __init__(self, tau: int):
        self.tau = tau

    def choose(self, q, rng):
        msgs = _random_messages(q, rng)
        return msgs, (msgs, rng)

    def _guess(self, sigma):
        msgs, rng = sigma
        forged = [bytes([msgs[0][0] ^ 1]) + msgs[0][1:]] + list(msgs[1:])
        return forged, rng.getrandbits(self.tau)

    def forge(self, state, key, xs, tag, sigma):
        return self._guess(sigma)

    def respond(self, sigma, tag):
        return self._guess(sigma)


class BitFlipAdversary:
    """Flips one bit of message ``index`` and keeps the genuine final tag."""

    def __init__(self, index: int = 0, bit: int = 0):
        self.index, self.bit = index, bit

    def choose(self, q, rng):
        msgs = _random_messages(q, rng)
        return msgs, msgs

    def forge(self, state, key, xs, tag, sigma):
        msgs = list(sigma)
        m = bytearray(msgs[self.index])
        m[self.bit // 8] ^= 1 << (self.bit % 8)
        msgs[self.index] = bytes(m)
        return msgs, tag


class TruncationAdversary:
    """Keeps the first ``keep`` messages and presents the stored tag ``X_keep``
    as the final tag. Wins every time against plaintext tag storage."""

    def __init__(self, keep: int):
        self.keep = keep

    def choose(self, q, rng):
        msgs = _random_messages(q, rng)
        return msgs, msgs

    def forge(self, state, key, xs, tag, sigma):
        return list(sigma[: self.keep]), xs[self.keep - 1]


class ExtensionAdversary:
    """Uses the leaked current key/state to append correctly signed messages.

    The first ``q`` messages stay intact, so this is not an alteration and the
    game returns False by definition. With ``alter_first`` it also flips a bit
    of message 1 while keeping the extension's tag arithmetic.
    """

    def __init__(self, extra: int = 2, tau: int = 64, rounds: int = DEFAULT_ROUNDS,
                 alter_first: bool = False):
        self.extra, self.tau, self.rounds = extra, tau, rounds
        self.alter_first = alter_first

    def choose(self, q, rng):
        msgs = _random_messages(q, rng)
        return msgs, (msgs, rng)

    def forge(self, state, key, xs, tag, sigma):
        msgs, rng = sigma
        g = truncated_mac(self.tau, self.rounds)
        out = list(msgs)
        for m in _random_messages(self.extra, rng):
            tag ^= g(key, m)
            key, state, _ = update(state, False, self.tau)
            out.append(m)
        if self.alter_first:
            out[0] = bytes([out[0][0] ^ 0x80]) + out[0][1:]
        return out, tag
