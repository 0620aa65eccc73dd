import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import chaskey_oracle_int

from tamperlog.combiner import Combiner, aggregate, combine, uncombine
from tamperlog.errors import StructuralError
from tamperlog.prf import Tag, chaskey_mac

tags64 = st.integers(0, (1 << 64) - 1).map(lambda v: Tag(v, 64))


def test_identity_and_self_inverse(rng):
    x = Tag(rng.getrandbits(64), 64)
    assert combine(Tag.zero(64), x) == x
    assert combine(x, x) == Tag.zero(64)
    assert uncombine(x, Tag.zero(64)) == x
    assert uncombine(x, x) == Tag.zero(64)


def test_definitional_xor():
    a, b = Tag(0xDEADBEEFDEADBEEF, 64), Tag(0xFFFFFFFFFFFFFFFF, 64)
    assert combine(a, b).value == 0x2152411021524110


@settings(max_examples=2500)
@given(tags64, tags64, tags64)
def test_algebra(x, y, z):
    assert combine(x, y) == combine(y, x)
    assert uncombine(combine(x, y), y) == x
    assert combine(x, Tag.zero(64)) == x
    assert combine(combine(x, y), z) == combine(x, combine(y, z))


def test_tau_mismatch():
    with pytest.raises(StructuralError):
        combine(Tag(1, 64), Tag(1, 128))
    with pytest.raises(StructuralError):
        uncombine(Tag(1, 128), Tag(1, 64))


def test_aggregate_small_cases(rng):
    assert aggregate([], []) == Tag.zero(64)
    k, m = rng.randbytes(16), rng.randbytes(20)
    assert aggregate([k], [m]) == chaskey_mac(k, m, 12, 64)
    with pytest.raises(StructuralError):
        aggregate([k], [])


def test_aggregate_matches_oracle_fold(rng):
    keys = [rng.randbytes(16) for _ in range(7)]
    msgs = [rng.randbytes(rng.randrange(40)) for _ in range(7)]
    want = 0
    for k, m in zip(keys, msgs):
        want ^= chaskey_oracle_int(k, m, 64, 12)
    assert aggregate(keys, msgs).value == want


@pytest.mark.parametrize("n", range(1, 6))
def test_permutation_invariance_exhaustive(n):
    r = random.Random(n)
    pairs = [(r.randbytes(16), r.randbytes(r.randrange(1, 30))) for _ in range(n)]
    c = Combiner(64)
    ref = c.aggregate(*zip(*pairs))
    for perm in itertools.permutations(pairs):
        assert c.aggregate(*zip(*perm)) == ref


def test_removal_property_exhaustive_q6():
    r = random.Random(6)
    c = Combiner(64)
    keys = [r.randbytes(16) for _ in range(6)]
    msgs = [r.randbytes(24) for _ in range(6)]
    full = c.aggregate(keys, msgs)
    for i in range(6):
        rest = c.aggregate(keys[:i] + keys[i + 1:], msgs[:i] + msgs[i + 1:])
        assert uncombine(full, c.mac(keys[i], msgs[i])) == rest
    # peel a suffix back one message at a time, for every prefix length r
    for rr in range(1, 7):
        t = c.aggregate(keys[:rr], msgs[:rr])
        for i in range(rr, 0, -1):
            t = uncombine(t, c.mac(keys[i - 1], msgs[i - 1]))
            assert t == c.aggregate(keys[:i - 1], msgs[:i - 1])
        assert t == Tag.zero(64)


def test_custom_mac_plugs_in():
    c = Combiner(16, mac=lambda k, m: Tag(len(m), 16))
    assert c.aggregate([b"k"] * 3, [b"a", b"bb", b"ccc"]).value == 1 ^ 2 ^ 3
