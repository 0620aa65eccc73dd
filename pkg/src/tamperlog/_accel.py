"""Optional numba kernel for the Chaskey MAC; bit-identical to the pure path."""
from __future__ import annotations

import numpy as np
from numba import njit

_M = 0xFFFFFFFF


@njit(cache=True, inline="always")
def _rounds(v0, v1, v2, v3, n):
    for _ in range(n):
        v0 = (v0 + v1) & _M
        v1 = (((v1 << 5) | (v1 >> 27)) & _M) ^ v0
        v0 = ((v0 << 16) | (v0 >> 16)) & _M
        v2 = (v2 + v3) & _M
        v3 = (((v3 << 8) | (v3 >> 24)) & _M) ^ v2
        v0 = (v0 + v3) & _M
        v3 = (((v3 << 13) | (v3 >> 19)) & _M) ^ v0
        v2 = (v2 + v1) & _M
        v1 = (((v1 << 7) | (v1 >> 25)) & _M) ^ v2
        v2 = ((v2 << 16) | (v2 >> 16)) & _M
    return v0, v1, v2, v3


@njit(cache=True, inline="always")
def _word(buf, off):
    return (np.int64(buf[off]) | (np.int64(buf[off + 1]) << 8)
            | (np.int64(buf[off + 2]) << 16) | (np.int64(buf[off + 3]) << 24))


@njit(cache=True)
def chaskey_kernel(k0, k1, k2, k3, l0, l1, l2, l3, m0, m1, m2, m3, msg, rounds):
    """``l*`` is the full-block subkey, ``m*`` the padded-block subkey."""
    v0, v1, v2, v3 = k0, k1, k2, k3
    n = msg.shape[0]
    last = ((n - 1) // 16) * 16 if n > 0 else 0
    for off in range(0, last, 16):
        v0, v1, v2, v3 = _rounds(v0 ^ _word(msg, off), v1 ^ _word(msg, off + 4),
                                 v2 ^ _word(msg, off + 8), v3 ^ _word(msg, off + 12), rounds)
    tail = np.zeros(16, np.uint8)
    rem = n - last
    for i in range(rem):
        tail[i] = msg[last + i]
    if n > 0 and rem == 16:
        s0, s1, s2, s3 = l0, l1, l2, l3
    else:
        tail[rem] = 1
        s0, s1, s2, s3 = m0, m1, m2, m3
    v0, v1, v2, v3 = _rounds(v0 ^ _word(tail, 0) ^ s0, v1 ^ _word(tail, 4) ^ s1,
                             v2 ^ _word(tail, 8) ^ s2, v3 ^ _word(tail, 12) ^ s3, rounds)
    return v0 ^ s0, v1 ^ s1, v2 ^ s2, v3 ^ s3
