"""Counter-based Philox4x32-10 generator, vectorised over numpy arrays.

Every draw is a pure function of ``(seed, stream, sample, step)`` so a sample
produces the same normals whatever chunk or thread computes it.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_MASK32 = np.uint64(0xFFFFFFFF)
_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = 0x9E3779B9
_W1 = 0xBB67AE85
_ROUNDS = 10

# Stream tags keep unrelated consumers of one seed apart.
STREAM_FINITE = 1
STREAM_PATH = 2
STREAM_GRID = 3
STREAM_CHECK = 4


def philox4x32(counter, key):
    """Philox4x32-10 block function.

    ``counter`` is a sequence of four uint32-valued arrays (broadcastable),
    ``key`` a pair of Python ints. Returns four uint64 arrays holding 32-bit words.
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) & _MASK32 for c in counter)
    k0, k1 = int(key[0]) & 0xFFFFFFFF, int(key[1]) & 0xFFFFFFFF
    for _ in range(_ROUNDS):
        p0 = _M0 * c0
        p1 = _M1 * c2
        hi0, lo0 = p0 >> np.uint64(32), p0 & _MASK32
        hi1, lo1 = p1 >> np.uint64(32), p1 & _MASK32
        c0, c1, c2, c3 = hi1 ^ c1 ^ np.uint64(k0), lo1, hi0 ^ c3 ^ np.uint64(k1), lo0
        k0 = (k0 + _W0) & 0xFFFFFFFF
        k1 = (k1 + _W1) & 0xFFFFFFFF
    return c0, c1, c2, c3


def _to_unit(hi, lo):
    # 53 random bits, offset by half an ulp so the result lies in (0, 1).
    bits = (hi << np.uint64(21)) | (lo >> np.uint64(11))
    return (bits.astype(np.float64) + 0.5) * 2.0**-53


def uniforms(seed: int, stream: int, start: int, count: int, width: int) -> np.ndarray:
    """Uniforms on (0, 1) for samples ``start..start+count-1`` and steps ``0..width-1``."""
    if count < 0 or width < 0:
        raise ValueError("count and width must be non-negative")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    half = (width + 1) // 2
    sample = np.arange(start, start + count, dtype=np.uint64)[:, None]
    pair = np.arange(half, dtype=np.uint64)[None, :]
    w0, w1, w2, w3 = philox4x32(
        (pair, sample & _MASK32, sample >> np.uint64(32), np.uint64(stream)),
        (seed & 0xFFFFFFFF, seed >> 32),
    )
    out = np.empty((count, 2 * half), dtype=np.float64)
    out[:, 0::2] = _to_unit(w0, w1)
    out[:, 1::2] = _to_unit(w2, w3)
    return out[:, :width]


def normals(seed: int, stream: int, start: int, count: int, width: int) -> np.ndarray:
    """Standard normals by inverse CDF, shape ``(count, width)``."""
    return ndtri(uniforms(seed, stream, start, count, width))
