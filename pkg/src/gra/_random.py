"""Named, independent PRNG streams derived from one 64-bit master seed."""

import hashlib

import numpy as np

_MASK64 = (1 << 64) - 1

STREAMS = ("split", "negatives", "init", "generator", "generator-edges", "labels",
           "features", "masks", "decoder", "decoder-init")


def _stream_key(name):
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def stream(seed, name):
    """Return a fresh ``numpy.random.Generator`` for ``(seed, name)``.

    The same pair always yields the same sequence, and different names give
    statistically independent sequences for the same seed.
    """
    seed = int(seed)
    if seed < 0 or seed > _MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    seq = np.random.SeedSequence([seed & 0xFFFFFFFF, seed >> 32, _stream_key(name)])
    return np.random.Generator(np.random.PCG64(seq))
