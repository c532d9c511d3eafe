"""Frequent binary pattern extraction.

A k-bit window slides over a bit string with stride 1; the distinct window
values and their occurrence counts, ordered by count descending and pattern
value ascending, form the pattern list used for binning and retrieval.

The array functions (:func:`window_values`, :func:`pattern_counts`,
:func:`order_patterns`) work on stacks of templates and back both the
object API and the batch evaluation code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bitcore import BinaryTemplate, Pattern

MAX_K = 16


def _check_k(k: int, n: int) -> None:
    if not 1 <= k < n:
        raise ValueError(f"pattern length k={k} must satisfy 1 <= k < n={n}")
    if k > MAX_K:
        raise ValueError(f"pattern length k={k} exceeds supported maximum {MAX_K}")


def window_values(bits: np.ndarray, k: int) -> np.ndarray:
    """Integer value of every k-bit window along the last axis.

    ``bits[..., n]`` -> ``int64[..., n - k + 1]``; the first bit of a window
    is its most significant bit.
    """
    bits = np.asarray(bits)
    n = bits.shape[-1]
    _check_k(k, n)
    width = n - k + 1
    values = np.zeros(bits.shape[:-1] + (width,), dtype=np.int64)
    for j in range(k):
        values <<= 1
        values |= bits[..., j : j + width]
    return values


def pattern_counts(bits: np.ndarray, k: int) -> np.ndarray:
    """Occurrence count of each of the ``2**k`` patterns along the last axis.

    ``bits[..., n]`` -> ``int64[..., 2**k]``.
    """
    values = window_values(bits, k)
    lead = values.shape[:-1]
    flat = values.reshape(-1, values.shape[-1])
    rows = flat.shape[0]
    offsets = (np.arange(rows, dtype=np.int64) << k)[:, None]
    counts = np.bincount((flat + offsets).ravel(), minlength=rows << k)
    return counts.reshape(*lead, 1 << k).astype(np.int64)


def order_patterns(counts: np.ndarray) -> np.ndarray:
    """Pattern values with non-zero count, by (count desc, value asc).

    ``counts`` is a 1-D array indexed by pattern value.
    """
    counts = np.asarray(counts)
    present = np.flatnonzero(counts)
    # lexsort: last key is primary
    order = np.lexsort((present, -counts[present]))
    return present[order]


def top_values(counts: np.ndarray) -> np.ndarray:
    """Most frequent pattern value per row; ties go to the smallest value."""
    return np.argmax(counts, axis=-1)


@dataclass(frozen=True)
class PatternList:
    """Unique patterns of one bit string with their counts, canonically ordered."""

    entries: tuple[tuple[Pattern, int], ...]
    k: int
    source_n: int

    def __post_init__(self):
        seen = set()
        for pattern, count in self.entries:
            if pattern.k != self.k:
                raise ValueError("pattern length differs from list k")
            if count < 1:
                raise ValueError("counts must be positive")
            if pattern.value in seen:
                raise ValueError(f"duplicate pattern {pattern}")
            seen.add(pattern.value)
        keys = [(-c, p.value) for p, c in self.entries]
        if keys != sorted(keys):
            raise ValueError("entries are not in (count desc, value asc) order")
        if sum(c for _, c in self.entries) > self.source_n - self.k + 1:
            raise ValueError("counts exceed the number of windows")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def patterns(self) -> list[Pattern]:
        return [p for p, _ in self.entries]

    @property
    def values(self) -> list[int]:
        return [p.value for p, _ in self.entries]

    @property
    def counts(self) -> list[int]:
        return [c for _, c in self.entries]

    @classmethod
    def from_counts(cls, counts: np.ndarray, source_n: int) -> "PatternList":
        counts = np.asarray(counts)
        k = int(counts.size).bit_length() - 1
        return cls(
            tuple((Pattern(int(v), k), int(counts[v])) for v in order_patterns(counts)),
            k,
            source_n,
        )


def extract_patterns(f: BinaryTemplate, k: int) -> PatternList:
    """Frequent pattern list of ``f`` for window length ``k``."""
    return PatternList.from_counts(pattern_counts(f.bits, k), f.n)


def top_pattern(pl: PatternList) -> Pattern:
    """Highest-ranked pattern of a list."""
    if not pl.entries:
        raise LookupError("empty pattern list has no top pattern")
    return pl.entries[0][0]
