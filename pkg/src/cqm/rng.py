"""Counter-based uniform streams.

Every random draw in the package is addressed by ``(seed, stream, index)``:
the value for trial ``index`` never depends on how many values were drawn
before it, so chunked or threaded sampling reproduces serial output exactly.

The generator is numpy's Philox4x64 keyed by ``(seed, hash(stream))``. One
Philox counter step yields four 64-bit words, so trial ``i`` reads word
``i % 4`` of counter block ``i // 4``.
"""

import hashlib

import numpy as np
from numpy.random import Philox

_MASK64 = (1 << 64) - 1


def stream_id(stream) -> int:
    """Stable 64-bit integer for an arbitrary string or integer stream label."""
    if isinstance(stream, (int, np.integer)):
        return int(stream) & _MASK64
    digest = hashlib.blake2b(str(stream).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def raw_words(seed: int, stream, start: int, count: int) -> np.ndarray:
    """Raw uint64 words ``start .. start+count-1`` of the ``(seed, stream)`` sequence."""
    if count < 0 or start < 0:
        raise ValueError("start and count must be non-negative")
    key = np.array([int(seed) & _MASK64, stream_id(stream)], dtype=np.uint64)
    block, offset = divmod(int(start), 4)
    bitgen = Philox(key=key, counter=block)
    return bitgen.random_raw(offset + count)[offset:]


def uniforms(seed: int, stream, start: int, count: int) -> np.ndarray:
    """Doubles in [0, 1) with 53 random bits, addressed by trial index."""
    words = raw_words(seed, stream, start, count)
    return (words >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)
