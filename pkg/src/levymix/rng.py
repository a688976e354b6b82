"""Counter-based splittable random streams.

Streams are keyed by a (seed, *path) tuple hashed into a Philox key, so
any worker can rebuild its stream independently of evaluation order.
"""

import hashlib

import numpy as np


def stream_key(seed, *path):
    """Derive a stable 128-bit Philox key from a seed and a path of labels."""
    parts = [str(int(seed))]
    for p in path:
        parts.append(str(p))
    digest = hashlib.sha256("/".join(parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:16], "little")


def stream(seed, *path):
    """Independent Generator for the given (seed, *path) label."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, *path)))
