"""Fixed-length bit strings and k-bit patterns.

Bits are held as read-only ``uint8`` arrays of zeros and ones.  The textual
form of a template is a lowercase hex string of ``ceil(n / 8)`` bytes, MSB
first (the first bit of the template is the high bit of the first byte),
zero-padded at the tail, always stored alongside ``n``.

A :class:`Pattern` reads its bits big-endian: the first scanned bit is the
most significant bit of ``value``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError


@dataclass(frozen=True, eq=False)
class BinaryTemplate:
    """Immutable bit string of length ``n``."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bits)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("a template is a non-empty 1-D bit sequence")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("template bits must be 0 or 1")
        arr = np.array(arr, dtype=np.uint8)
        arr.flags.writeable = False
        object.__setattr__(self, "bits", arr)

    @property
    def n(self) -> int:
        return int(self.bits.size)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other):
        if not isinstance(other, BinaryTemplate):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.bits, other.bits))

    def __hash__(self):
        return hash((self.n, self.bits.tobytes()))

    def __str__(self):
        return "".join("1" if b else "0" for b in self.bits)

    def __repr__(self):
        if self.n <= 32:
            return f"BinaryTemplate('{self}')"
        return f"BinaryTemplate(n={self.n}, hex='{self.to_hex()[:16]}...')"

    @classmethod
    def from_string(cls, text: str) -> "BinaryTemplate":
        """Build from a string of '0'/'1' characters, e.g. ``"0101"``."""
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        return cls(np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0"))

    def to_hex(self) -> str:
        return np.packbits(self.bits).tobytes().hex()

    @classmethod
    def from_hex(cls, text: str, n: int) -> "BinaryTemplate":
        raw = bytes.fromhex(text)
        if n <= 0 or len(raw) != (n + 7) // 8:
            raise ValueError(f"hex payload of {len(raw)} bytes does not hold n={n} bits")
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))
        if bits[n:].any():
            raise ValueError("non-zero padding bits in hex payload")
        return cls(bits[:n])

    def to_dict(self) -> dict:
        return {"n": self.n, "hex": self.to_hex()}

    @classmethod
    def from_dict(cls, data: dict) -> "BinaryTemplate":
        return cls.from_hex(data["hex"], int(data["n"]))


@dataclass(frozen=True, order=True)
class Pattern:
    """A ``k``-bit pattern; ``value`` is the big-endian integer reading."""

    value: int
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("pattern length k must be >= 1")
        if not 0 <= self.value < (1 << self.k):
            raise ValueError(f"value {self.value} does not fit in {self.k} bits")

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.value >> (self.k - 1 - i)) & 1 for i in range(self.k))

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "Pattern":
        value = 0
        for b in bits:
            if b not in (0, 1):
                raise ValueError("pattern bits must be 0 or 1")
            value = (value << 1) | int(b)
        return cls(value, len(bits))

    @classmethod
    def from_string(cls, text: str) -> "Pattern":
        return cls.from_bits([int(c) for c in text])

    def __str__(self):
        return format(self.value, f"0{self.k}b")


def hamming_distance(a: BinaryTemplate, b: BinaryTemplate) -> int:
    """Number of positions at which ``a`` and ``b`` differ."""
    if a.n != b.n:
        raise DimensionError(f"length mismatch: {a.n} vs {b.n}")
    return int(np.count_nonzero(a.bits != b.bits))


def xor(*patterns: Pattern) -> Pattern:
    """Positionwise exclusive-or of one or more equal-length patterns."""
    if not patterns:
        raise ValueError("xor needs at least one pattern")
    k = patterns[0].k
    if any(p.k != k for p in patterns):
        raise DimensionError("pattern lengths differ")
    return Pattern(reduce(lambda acc, p: acc ^ p.value, patterns, 0), k)


def concat(parts: Iterable[BinaryTemplate]) -> BinaryTemplate:
    """Concatenate templates left to right."""
    parts = list(parts)
    if not parts:
        raise ValueError("concat needs at least one template")
    return BinaryTemplate(np.concatenate([p.bits for p in parts]))
