"""Deterministic hashing and splittable random streams.

Everything randomized in this package derives from explicit integer seeds.
Child streams are derived by hashing string/int label paths with BLAKE2b
(unkeyed, 8-byte digest), so results are stable across processes and
machines and independent of iteration order elsewhere in a run.
"""

from __future__ import annotations

import hashlib
import random

_MASK64 = 0xFFFFFFFFFFFFFFFF
_SEP = b"\x1f"


def hash64(*parts: object) -> int:
    """64-bit BLAKE2b over the UTF-8 rendering of each part."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(str(part).encode("utf-8"))
        h.update(_SEP)
    return int.from_bytes(h.digest(), "big")


def mix(seed: int, *parts: object) -> int:
    """Derive a child seed from a base seed and a label path."""
    return hash64(seed & _MASK64, *parts)


def prefix_hasher(seed: int, *parts: object) -> "hashlib.blake2b":
    """A reusable hash prefix: extending it with hash64_from(prefix, *rest)
    yields exactly mix(seed, *parts, *rest), without re-hashing the prefix."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(seed & _MASK64).encode("utf-8"))
    h.update(_SEP)
    for part in parts:
        h.update(str(part).encode("utf-8"))
        h.update(_SEP)
    return h


def hash64_from(prefix: "hashlib.blake2b", *parts: object) -> int:
    """Extend a prefix_hasher with more parts and read off the 64-bit hash."""
    h = prefix.copy()
    for part in parts:
        h.update(str(part).encode("utf-8"))
        h.update(_SEP)
    return int.from_bytes(h.digest(), "big")


def child_rng(seed: int, *parts: object) -> random.Random:
    """A fresh random.Random keyed by (seed, *parts)."""
    return random.Random(mix(seed, *parts))


def unit_from_hash(h: int) -> float:
    """Map a 64-bit hash to [0, 1) using its top 53 bits."""
    return (h >> 11) / float(1 << 53)


def unit(seed: int, *parts: object) -> float:
    """Deterministic uniform variate in [0, 1) keyed by (seed, *parts)."""
    return unit_from_hash(mix(seed, *parts))
