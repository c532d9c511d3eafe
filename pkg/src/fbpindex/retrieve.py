"""Bin-limited retrieval with score-level fusion.

A probe is turned into an ordered sequence of patterns (bins to visit).  The
first ``t`` bins are opened, every subject found there is compared on all
``m`` characteristics, and the z-normalized similarities are summed.  Each
opened bin of size ``|b|`` costs ``|b| * m`` comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Mapping, Sequence

import numpy as np

from .bitcore import BinaryTemplate, Pattern
from .errors import ConfigurationError
from .fbp import order_patterns, pattern_counts
from .index import BinTable, Strategy
from .protect import IntegerTemplate, ProtectedBatch, Scheme
from .scores import NormStats, fuse, zscore_normalize

__all__ = [
    "ProbeSet", "CandidateList", "probe_sequence", "probe_sequences", "xor_sequence",
    "search", "exhaustive_search", "zscore_normalize", "visit_plan",
]


@dataclass(frozen=True)
class ProbeSet:
    """Protected probe templates keyed by characteristic."""

    templates: Mapping[str, BinaryTemplate]
    integers: Mapping[str, IntegerTemplate] = field(default_factory=dict)

    @classmethod
    def from_batches(cls, batches: Mapping[str, ProtectedBatch], row: int) -> "ProbeSet":
        return cls({c: b.binary(row) for c, b in batches.items()},
                   {c: b.scored(row) for c, b in batches.items() if b.scheme is Scheme.IOM_GRP})

    def batch(self, name: str, scheme: Scheme) -> ProtectedBatch:
        bits = self.templates[name].bits[None, :]
        if scheme is Scheme.IOM_GRP:
            if name not in self.integers:
                raise ConfigurationError(f"{name}: IoM-GRP probe needs its integer template")
            t = self.integers[name]
            return ProtectedBatch(scheme, bits, t.ints[None, :], t.q)
        return ProtectedBatch(scheme, bits)


@dataclass(frozen=True)
class CandidateList:
    """Ranked candidates (score descending, then subject id ascending)."""

    candidates: tuple[tuple[str, float], ...]
    comparisons_performed: int
    bins_visited: int
    visited: tuple[int, ...] = ()

    def __len__(self):
        return len(self.candidates)

    @property
    def ids(self) -> list[str]:
        return [sid for sid, _ in self.candidates]

    def score_of(self, subject_id: str) -> float | None:
        for sid, score in self.candidates:
            if sid == subject_id:
                return score
        return None


# ---------------------------------------------------------------------------
# probe sequences


def xor_sequence(lists: Sequence[np.ndarray], k: int, cap: int | None = None) -> np.ndarray:
    """XOR codes of pattern tuples, one pattern per characteristic list.

    Tuples are taken in ascending order of summed ranks (rank = position in
    each list), ties by resulting XOR value; at most ``cap`` tuples
    (default ``m * 2**k``) are enumerated and repeated values keep their
    first position.
    """
    lists = [np.asarray(lst, dtype=np.int64) for lst in lists]
    m = len(lists)
    if any(lst.size == 0 for lst in lists):
        return np.empty(0, dtype=np.int64)
    if m == 1:
        return lists[0].copy()
    cap = m * (1 << k) if cap is None else cap
    lengths = [lst.size for lst in lists]
    # number of tuples per rank sum: convolution of the per-list indicator vectors
    per_sum = reduce(np.convolve, (np.ones(n, dtype=np.int64) for n in lengths))
    reach = int(np.searchsorted(np.cumsum(per_sum), cap))
    max_sum = min(reach, per_sum.size - 1)
    grids = np.meshgrid(*[np.arange(min(n, max_sum + 1)) for n in lengths], indexing="ij")
    ranks = [g.ravel() for g in grids]
    total = reduce(np.add, ranks)
    keep = total <= max_sum
    ranks = [r[keep] for r in ranks]
    total = total[keep]
    values = reduce(np.bitwise_xor, (lst[r] for lst, r in zip(lists, ranks)))
    order = np.lexsort((values, total))[:cap]
    ordered = values[order]
    _, first = np.unique(ordered, return_index=True)
    return ordered[np.sort(first)]


def probe_sequences(bits: Mapping[str, np.ndarray], order: Sequence[str],
                    strategy: "Strategy | str", k: int) -> list[np.ndarray]:
    """Visit order (pattern values) for each row of a stack of probes."""
    strategy = Strategy.parse(strategy)
    rows = [np.asarray(bits[c]) for c in order]
    if strategy is Strategy.FEATURE_CONCAT:
        counts = pattern_counts(np.concatenate(rows, axis=-1), k)
        return [order_patterns(c) for c in counts]
    per_char = [pattern_counts(r, k) for r in rows]
    if strategy is Strategy.RANKED_CODES:
        merged = reduce(np.maximum, per_char)
        return [order_patterns(c) for c in merged]
    n_rows = per_char[0].shape[0]
    return [xor_sequence([order_patterns(pc[i]) for pc in per_char], k) for i in range(n_rows)]


def _check_probe(z: ProbeSet, order: Sequence[str]) -> None:
    if set(z.templates) != set(order):
        raise ConfigurationError(
            f"probe characteristics {sorted(z.templates)} do not match index {sorted(order)}")


def probe_sequence(z: ProbeSet, strategy: "Strategy | str", k: int,
                   order: Sequence[str] | None = None) -> list[Pattern]:
    """Ordered patterns a probe visits under ``strategy``."""
    order = list(order) if order is not None else list(z.templates)
    _check_probe(z, order)
    bits = {c: z.templates[c].bits[None, :] for c in order}
    return [Pattern(int(v), k) for v in probe_sequences(bits, order, strategy, k)[0]]


def visit_plan(sequence: np.ndarray, occupancy: np.ndarray, t: int,
               skip_empty: bool = False) -> np.ndarray:
    """The first ``t`` bins of ``sequence``; empty bins count unless ``skip_empty``."""
    if skip_empty:
        sequence = sequence[occupancy[sequence] > 0]
    return sequence[:t]


# ---------------------------------------------------------------------------
# search


def _check_calibration(bt: BinTable, calib: Mapping[str, NormStats] | None):
    calib = calib if calib is not None else bt.calibration
    if calib is None:
        raise ConfigurationError("search needs calibration statistics")
    missing = [c for c in bt.characteristic_order if c not in calib]
    if missing:
        raise ConfigurationError(f"no calibration for characteristic(s) {missing}")
    return calib


def score_rows(z: ProbeSet, bt: BinTable, rows: np.ndarray,
               calib: Mapping[str, NormStats]) -> np.ndarray:
    """Fused scores of the probe against enrolled rows ``rows``."""
    sims = {}
    for c in bt.characteristic_order:
        enrolled = bt.batches[c]
        probe = z.batch(c, enrolled.scheme)
        counts, denom = probe.similarity_counts(enrolled.take(rows))
        sims[c] = counts[0] / denom
    return fuse(sims, calib)


def rank_candidates(bt: BinTable, rows: np.ndarray, scores: np.ndarray):
    order = np.lexsort((bt.id_rank[rows], -scores))
    return tuple((bt.subject_ids[rows[i]], float(scores[i])) for i in order)


def search(z: ProbeSet, bt: BinTable, t: int, calib: Mapping[str, NormStats] | None = None,
           skip_empty: bool = False) -> CandidateList:
    """Visit up to ``t`` bins and rank the subjects found there."""
    if not 1 <= t <= 1 << bt.k:
        raise ValueError(f"t={t} outside [1, {1 << bt.k}]")
    calib = _check_calibration(bt, calib)
    _check_probe(z, bt.characteristic_order)
    bits = {c: z.templates[c].bits[None, :] for c in bt.characteristic_order}
    seq = probe_sequences(bits, bt.characteristic_order, bt.strategy, bt.k)[0]
    visited = visit_plan(seq, bt.occupancy, t, skip_empty)
    parts = [bt.members(v) for v in visited]
    rows = np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
    scores = score_rows(z, bt, rows, calib)
    return CandidateList(rank_candidates(bt, rows, scores), int(rows.size) * bt.m,
                         int(visited.size), tuple(int(v) for v in visited))


def exhaustive_search(z: ProbeSet, bt: BinTable,
                      calib: Mapping[str, NormStats] | None = None) -> CandidateList:
    """Score every enrolled subject, ignoring the bins."""
    calib = _check_calibration(bt, calib)
    _check_probe(z, bt.characteristic_order)
    rows = np.arange(bt.n_subjects)
    scores = score_rows(z, bt, rows, calib)
    return CandidateList(rank_candidates(bt, rows, scores), bt.n_subjects * bt.m, 0)
