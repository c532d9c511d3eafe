"""Portable counter-based random streams.

Every random quantity in the package (projection matrices, synthetic
embeddings, protocol splits) is drawn from here so that results depend only
on integer seeds, never on the numpy ``Generator`` implementation.

Construction
------------
The generator is SplitMix64 used in counter mode.  A stream is identified by
a ``(seed, stream)`` pair of 64-bit integers; its starting state is::

    state0 = mix(seed ^ mix(stream))

and the ``i``-th output (``i = 0, 1, ...``) is ``mix(state0 + (i + 1) * G)``
with ``G = 0x9E3779B97F4A7C15`` and ``mix`` the SplitMix64 finalizer.  All
arithmetic is modulo 2**64.  Because element ``i`` depends only on ``i``,
any slice of a stream can be generated independently and in vectorized form.

Uniform doubles take the top 53 bits of an output.  Gaussian samples use the
Box-Muller transform on consecutive pairs of uniforms ``(u1, u2)``, producing
``sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`` then ``... * sin(2 pi u2)``.
"""

from __future__ import annotations

import hashlib

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def _mix(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def _as_u64(x: int) -> np.ndarray:
    return np.array([int(x) & _MASK64], dtype=np.uint64)


def stream_id(*parts: object) -> int:
    """Stable 64-bit identifier for a tuple of names/numbers.

    Uses SHA-256 of the ``repr``-joined parts, so it is independent of
    Python's salted ``hash``.
    """
    text = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(text).digest()[:8], "big")


def raw_u64(seed: int, stream: int, count: int, offset: int = 0) -> np.ndarray:
    """``count`` raw 64-bit outputs of stream ``(seed, stream)`` from ``offset``."""
    if count < 0:
        raise ValueError("count must be non-negative")
    state0 = _mix(_as_u64(seed) ^ _mix(_as_u64(stream)))
    idx = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return _mix(state0 + idx * _GOLDEN)


def uniform(seed: int, stream: int, count: int) -> np.ndarray:
    """Uniform doubles in ``[0, 1)`` with 53-bit resolution."""
    bits = raw_u64(seed, stream, count) >> np.uint64(11)
    return bits.astype(np.float64) * (1.0 / (1 << 53))


def gaussian(seed: int, stream: int, count: int) -> np.ndarray:
    """Standard-normal samples via Box-Muller."""
    pairs = (count + 1) // 2
    u = uniform(seed, stream, 2 * pairs).reshape(pairs, 2)
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    angle = 2.0 * np.pi * u[:, 1]
    out = np.empty((pairs, 2), dtype=np.float64)
    out[:, 0] = radius * np.cos(angle)
    out[:, 1] = radius * np.sin(angle)
    return out.reshape(-1)[:count]


def permutation(seed: int, stream: int, n: int) -> np.ndarray:
    """A permutation of ``range(n)`` (stable argsort of raw outputs)."""
    return np.argsort(raw_u64(seed, stream, n), kind="stable")
