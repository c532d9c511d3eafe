"""Multi-characteristic bin table.

Each enrolled subject is placed in exactly one bin, the k-bit pattern chosen
by one of three fusion strategies:

``feature``
    top pattern of the concatenation of all characteristic templates
    (windows cross the template boundaries);
``ranked``
    the best-ranked pattern over the merged per-characteristic pattern
    lists, i.e. ``argmax_v max_j count_j(v)`` with ties to the smaller value;
``xor``
    bitwise XOR of the per-characteristic top patterns.
"""

from __future__ import annotations

import enum
import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field
from functools import cached_property, reduce
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .bitcore import BinaryTemplate, Pattern
from .errors import ConfigurationError, DataFormatError, DimensionError, EnrollmentError
from .fbp import _check_k, pattern_counts, top_values
from .protect import IntegerTemplate, ProtectedBatch, Scheme
from .scores import NormStats

FORMAT_NAME = "fbpindex.bintable"
FORMAT_VERSION = 1


class Strategy(str, enum.Enum):
    FEATURE_CONCAT = "feature"
    RANKED_CODES = "ranked"
    XOR_CODES = "xor"

    @classmethod
    def parse(cls, name: "str | Strategy") -> "Strategy":
        if isinstance(name, Strategy):
            return name
        aliases = {"featureconcat": cls.FEATURE_CONCAT, "feature-concatenation": cls.FEATURE_CONCAT,
                   "concat": cls.FEATURE_CONCAT, "rankedcodes": cls.RANKED_CODES,
                   "ranked-codes": cls.RANKED_CODES, "xorcodes": cls.XOR_CODES,
                   "xor-codes": cls.XOR_CODES}
        key = str(name).strip().lower()
        try:
            return cls(key)
        except ValueError:
            if key in aliases:
                return aliases[key]
            raise ConfigurationError(f"unknown fusion strategy {name!r}") from None


@dataclass(frozen=True)
class EnrolRecord:
    """Protected templates of one subject, keyed by characteristic.

    ``integers`` carries the IoM-GRP integer form used for scoring.
    """

    subject_id: str
    templates: Mapping[str, BinaryTemplate]
    integers: Mapping[str, IntegerTemplate] = field(default_factory=dict)


def _ordered_bits(bits: Mapping[str, np.ndarray], order: Sequence[str], strategy: Strategy):
    rows = [np.asarray(bits[name]) for name in order]
    if strategy is not Strategy.FEATURE_CONCAT:
        lengths = {r.shape[-1] for r in rows}
        if len(lengths) > 1:
            raise DimensionError(
                f"{strategy.value} fusion needs equal template lengths, got {sorted(lengths)}")
    return rows


def assign_bins(bits: Mapping[str, np.ndarray], order: Sequence[str],
                strategy: "Strategy | str", k: int) -> np.ndarray:
    """Bin value for each row of a stack of templates per characteristic."""
    strategy = Strategy.parse(strategy)
    rows = _ordered_bits(bits, order, strategy)
    if strategy is Strategy.FEATURE_CONCAT:
        return top_values(pattern_counts(np.concatenate(rows, axis=-1), k))
    if strategy is Strategy.RANKED_CODES:
        merged = reduce(np.maximum, (pattern_counts(r, k) for r in rows))
        return top_values(merged)
    tops = [top_values(pattern_counts(r, k)) for r in rows]
    return reduce(np.bitwise_xor, tops)


def assign_bin(rec: EnrolRecord, strategy: "Strategy | str", k: int,
               order: Sequence[str] | None = None) -> Pattern:
    """Bin of a single enrolment record."""
    order = list(order) if order is not None else list(rec.templates)
    bits = {name: rec.templates[name].bits[None, :] for name in order}
    return Pattern(int(assign_bins(bits, order, strategy, k)[0]), k)


@dataclass(frozen=True, eq=False)
class BinTable:
    """Inverted index from k-bit pattern to enrolled subjects.

    ``batches`` holds the enrolled protected templates per characteristic,
    rows aligned with ``subject_ids``; ``assignment[i]`` is the bin of
    subject ``i``.
    """

    strategy: Strategy
    k: int
    characteristic_order: tuple[str, ...]
    subject_ids: tuple[str, ...]
    assignment: np.ndarray
    batches: Mapping[str, ProtectedBatch]
    schemes: Mapping[str, dict] = field(default_factory=dict)
    calibration: Mapping[str, NormStats] | None = None

    @property
    def m(self) -> int:
        return len(self.characteristic_order)

    @property
    def n_subjects(self) -> int:
        return len(self.subject_ids)

    @cached_property
    def occupancy(self) -> np.ndarray:
        """Subjects per pattern value, length ``2**k``."""
        return np.bincount(self.assignment, minlength=1 << self.k)

    @cached_property
    def _members(self) -> dict[int, np.ndarray]:
        order = np.argsort(self.assignment, kind="stable")
        values, starts = np.unique(self.assignment[order], return_index=True)
        chunks = np.split(order, starts[1:])
        return {int(v): c for v, c in zip(values, chunks)}

    @cached_property
    def id_rank(self) -> np.ndarray:
        """Position of each subject in ascending ``subject_id`` order."""
        ranks = np.empty(self.n_subjects, dtype=np.int64)
        ranks[sorted(range(self.n_subjects), key=self.subject_ids.__getitem__)] = np.arange(
            self.n_subjects)
        return ranks

    def members(self, value: int) -> np.ndarray:
        """Row indices of the subjects in bin ``value`` (ascending)."""
        return self._members.get(int(value), np.empty(0, dtype=np.int64))

    @property
    def bins(self) -> dict[Pattern, frozenset]:
        return {Pattern(v, self.k): frozenset(self.subject_ids[i] for i in rows)
                for v, rows in self._members.items()}

    def bin_of(self, subject_id: str) -> Pattern:
        return Pattern(int(self.assignment[self.subject_ids.index(subject_id)]), self.k)

    def record(self, subject_id: str) -> EnrolRecord:
        i = self.subject_ids.index(subject_id)
        templates = {c: self.batches[c].binary(i) for c in self.characteristic_order}
        integers = {c: self.batches[c].scored(i) for c in self.characteristic_order
                    if self.batches[c].scheme is Scheme.IOM_GRP}
        return EnrolRecord(subject_id, templates, integers)

    @property
    def store(self) -> dict[str, EnrolRecord]:
        return {sid: self.record(sid) for sid in self.subject_ids}

    # -- serialization -----------------------------------------------------

    def scheme_digest(self) -> str:
        payload = json.dumps({c: self.schemes.get(c, {}) for c in self.characteristic_order},
                             sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()

    def to_dict(self) -> dict:
        store = {}
        for c in self.characteristic_order:
            b = self.batches[c]
            entry = {"scheme": b.scheme.value, "n": b.n_bits,
                     "templates": [np.packbits(row).tobytes().hex() for row in b.bits]}
            if b.ints is not None:
                entry["q"] = int(b.q)
                entry["ints"] = [" ".join(map(str, row)) for row in b.ints.tolist()]
            store[c] = entry
        bins = {format(v, f"0{self.k}b"): [self.subject_ids[i] for i in rows]
                for v, rows in sorted(self._members.items())}
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "header": {
                "strategy": self.strategy.value,
                "k": self.k,
                "m": self.m,
                "characteristic_order": list(self.characteristic_order),
                "schemes": {c: self.schemes.get(c, {}) for c in self.characteristic_order},
                "scheme_digest": self.scheme_digest(),
                "calibration": None if self.calibration is None else
                {c: s.to_dict() for c, s in sorted(self.calibration.items())},
            },
            "subjects": list(self.subject_ids),
            "bins": bins,
            "store": store,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    def save(self, path) -> None:
        atomic_write_text(path, self.to_json())

    @classmethod
    def from_dict(cls, data: Mapping) -> "BinTable":
        try:
            if data.get("format") != FORMAT_NAME or data.get("version") != FORMAT_VERSION:
                raise DataFormatError("not a bin table file (format/version mismatch)")
            head = data["header"]
            order = tuple(head["characteristic_order"])
            subjects = tuple(data["subjects"])
            batches = {}
            for c in order:
                entry = data["store"][c]
                n = int(entry["n"])
                raw = [np.unpackbits(np.frombuffer(bytes.fromhex(h), dtype=np.uint8))[:n]
                       for h in entry["templates"]]
                bits = np.array(raw, dtype=np.uint8).reshape(len(subjects), n)
                ints = None
                if "ints" in entry:
                    ints = np.array([[int(x) for x in row.split()] for row in entry["ints"]],
                                    dtype=np.int64)
                batches[c] = ProtectedBatch(Scheme.parse(entry["scheme"]), bits, ints,
                                            entry.get("q"))
            k = int(head["k"])
            position = {sid: i for i, sid in enumerate(subjects)}
            assignment = np.full(len(subjects), -1, dtype=np.int64)
            for key, ids in data["bins"].items():
                for sid in ids:
                    assignment[position[sid]] = int(key, 2)
            if (assignment < 0).any():
                raise DataFormatError("subject without a bin")
            calib = head.get("calibration")
            table = cls(Strategy.parse(head["strategy"]), k, order, subjects, assignment,
                        batches, dict(head.get("schemes", {})),
                        None if calib is None else
                        {c: NormStats.from_dict(s) for c, s in calib.items()})
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, DataFormatError):
                raise
            raise DataFormatError(f"malformed bin table: {exc}") from exc
        if table.scheme_digest() != head.get("scheme_digest"):
            raise DataFormatError("scheme digest does not match header")
        return table

    @classmethod
    def load(cls, path) -> "BinTable":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"invalid JSON: {exc.msg}", exc.lineno) from exc
        return cls.from_dict(data)


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def build_from_batches(subject_ids: Sequence[str], batches: Mapping[str, ProtectedBatch],
                       strategy: "Strategy | str", k: int,
                       order: Sequence[str] | None = None,
                       schemes: Mapping[str, dict] | None = None,
                       calibration: Mapping[str, NormStats] | None = None) -> BinTable:
    """Index a stack of enrolled templates (rows aligned with ``subject_ids``)."""
    strategy = Strategy.parse(strategy)
    order = tuple(order) if order is not None else tuple(batches)
    subject_ids = tuple(subject_ids)
    if not subject_ids:
        raise EnrollmentError("nothing to enrol")
    if len(set(subject_ids)) != len(subject_ids):
        dupes = sorted({s for s in subject_ids if subject_ids.count(s) > 1})
        raise EnrollmentError(f"duplicate subject id(s): {dupes[:5]}")
    missing = [c for c in order if c not in batches]
    if missing:
        raise ConfigurationError(f"no templates for characteristic(s) {missing}")
    for c in order:
        if len(batches[c]) != len(subject_ids):
            raise DimensionError(f"{c}: {len(batches[c])} templates for {len(subject_ids)} subjects")
    n_min = min(batches[c].n_bits for c in order)
    _check_k(k, n_min if strategy is not Strategy.FEATURE_CONCAT
             else sum(batches[c].n_bits for c in order))
    assignment = assign_bins({c: batches[c].bits for c in order}, order, strategy, k)
    return BinTable(strategy, k, order, subject_ids, np.asarray(assignment, dtype=np.int64),
                    {c: batches[c] for c in order}, dict(schemes or {}), calibration)


def build(records: Sequence[EnrolRecord], strategy: "Strategy | str", k: int,
          order: Sequence[str] | None = None, **kwargs) -> BinTable:
    """Index a list of enrolment records."""
    if not records:
        raise EnrollmentError("nothing to enrol")
    order = tuple(order) if order is not None else tuple(records[0].templates)
    for rec in records:
        if set(rec.templates) != set(order):
            raise ConfigurationError(
                f"subject {rec.subject_id}: characteristics {sorted(rec.templates)} "
                f"do not match {sorted(order)}")
    batches = {}
    for c in order:
        lengths = {rec.templates[c].n for rec in records}
        if len(lengths) > 1:
            raise DimensionError(f"{c}: templates of differing lengths {sorted(lengths)}")
        bits = np.stack([rec.templates[c].bits for rec in records])
        if all(c in rec.integers for rec in records):
            ints = np.stack([rec.integers[c].ints for rec in records])
            batches[c] = ProtectedBatch(Scheme.IOM_GRP, bits, ints, records[0].integers[c].q)
        else:
            scheme = Scheme(kwargs.get("schemes", {}).get(c, {}).get("scheme", "biohashing"))
            if scheme is Scheme.IOM_GRP:
                raise ConfigurationError(f"{c}: IoM-GRP records need integer templates")
            batches[c] = ProtectedBatch(scheme, bits)
    return build_from_batches([r.subject_id for r in records], batches, strategy, k, order,
                              **kwargs)


def occupancy_stats(bt: BinTable) -> tuple[list[int], float, float]:
    """Sizes of the non-empty bins, their mean and population std."""
    sizes = bt.occupancy[bt.occupancy > 0]
    return [int(s) for s in sizes], float(sizes.mean()), float(sizes.std())
