"""Synthetic multi-characteristic embeddings and dataset files.

Each identity gets a standard-normal class mean per characteristic; a sample
is ``mean + sigma * noise`` with standard-normal noise.  Larger ``sigma``
means larger intra-class variation.  Values are stored as float32.

File formats
------------
CSV (UTF-8): header ``subject_id,characteristic,sample_id,v0,...,v{d-1}``,
one row per sample, values written with 9 significant digits (exact for
float32).  All characteristics must share ``d``.

Binary: ``<stem>.json`` manifest plus ``<stem>.bin`` holding the
little-endian float32 arrays of every characteristic back to back, each
laid out ``[subject, sample, dim]``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

from . import rng
from .errors import ConfigurationError, DataFormatError
from .index import atomic_write_text

BINARY_FORMAT = "fbpindex.embeddings"
BINARY_VERSION = 1


@dataclass(frozen=True)
class CharacteristicSpec:
    name: str
    dim: int = 512
    sigma: float = 0.5
    samples: int = 4


@dataclass(frozen=True)
class SynthSpec:
    n_identities: int = 1000
    characteristics: tuple[CharacteristicSpec, ...] = (
        CharacteristicSpec("face", 512, 0.5, 4),
        CharacteristicSpec("fingerprint", 512, 0.3, 4),
        CharacteristicSpec("iris", 512, 0.8, 4),
    )
    seed: int = 2024

    def validate(self, k_max: int = 8) -> None:
        if self.n_identities < 1:
            raise ConfigurationError("n_identities must be >= 1")
        if not self.characteristics:
            raise ConfigurationError("at least one characteristic is required")
        names = [c.name for c in self.characteristics]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"duplicate characteristic names in {names}")
        for c in self.characteristics:
            if not c.name or "," in c.name:
                raise ConfigurationError(f"invalid characteristic name {c.name!r}")
            if c.dim < k_max + 1:
                raise ConfigurationError(f"{c.name}: dim={c.dim} must be >= k_max + 1 = {k_max + 1}")
            if not (c.sigma >= 0 and np.isfinite(c.sigma)):
                raise ConfigurationError(f"{c.name}: sigma must be finite and >= 0, got {c.sigma}")
            if c.samples < 2:
                raise ConfigurationError(f"{c.name}: need >= 2 samples per identity")

    @classmethod
    def from_dict(cls, data: Mapping) -> "SynthSpec":
        kwargs = dict(data)
        if "characteristics" in kwargs:
            kwargs["characteristics"] = tuple(CharacteristicSpec(**c)
                                              for c in kwargs["characteristics"])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {"n_identities": self.n_identities, "seed": self.seed,
                "characteristics": [vars(c).copy() for c in self.characteristics]}


@dataclass(frozen=True, eq=False)
class EmbeddingDataset:
    """Embeddings per characteristic as ``float32[subject, sample, dim]`` arrays."""

    subject_ids: tuple[str, ...]
    data: Mapping[str, np.ndarray] = field(default_factory=dict)

    @property
    def characteristics(self) -> list[str]:
        return list(self.data)

    @property
    def n_subjects(self) -> int:
        return len(self.subject_ids)

    def manifest(self) -> dict:
        return {
            "subjects": self.n_subjects,
            "characteristics": [
                {"name": c, "dim": int(a.shape[2]), "samples": int(a.shape[1]),
                 "count": int(a.shape[0] * a.shape[1])}
                for c, a in self.data.items()
            ],
        }

    def records(self) -> Iterator[tuple[str, str, int, np.ndarray]]:
        """``(subject_id, characteristic, sample_id, embedding)`` tuples."""
        for c, arr in self.data.items():
            for i, sid in enumerate(self.subject_ids):
                for j in range(arr.shape[1]):
                    yield sid, c, j, arr[i, j]

    def validate(self) -> None:
        if len(set(self.subject_ids)) != self.n_subjects:
            raise DataFormatError("duplicate subject ids")
        for c, arr in self.data.items():
            if arr.ndim != 3 or arr.shape[0] != self.n_subjects:
                raise DataFormatError(f"{c}: array shape {arr.shape} does not match "
                                      f"{self.n_subjects} subjects")
            if arr.shape[1] < 2:
                raise DataFormatError(f"{c}: every identity needs >= 2 samples")
            if not np.isfinite(arr).all():
                raise DataFormatError(f"{c}: non-finite embedding values")

    def subset(self, characteristics: Sequence[str]) -> "EmbeddingDataset":
        missing = [c for c in characteristics if c not in self.data]
        if missing:
            raise ConfigurationError(f"dataset has no characteristic(s) {missing}")
        return EmbeddingDataset(self.subject_ids, {c: self.data[c] for c in characteristics})

    def __eq__(self, other):
        if not isinstance(other, EmbeddingDataset):
            return NotImplemented
        return (self.subject_ids == other.subject_ids
                and list(self.data) == list(other.data)
                and all(np.array_equal(self.data[c], other.data[c]) for c in self.data))


def generate(spec: SynthSpec) -> EmbeddingDataset:
    """Draw a dataset from ``spec``; a pure function of the spec."""
    spec.validate(k_max=0)
    width = len(str(spec.n_identities - 1))
    ids = tuple(f"id{i:0{width}d}" for i in range(spec.n_identities))
    data = {}
    for c in spec.characteristics:
        s, ns, d = spec.n_identities, c.samples, c.dim
        means = rng.gaussian(spec.seed, rng.stream_id("class-mean", c.name), s * d)
        noise = rng.gaussian(spec.seed, rng.stream_id("sample-noise", c.name), s * ns * d)
        values = means.reshape(s, 1, d) + c.sigma * noise.reshape(s, ns, d)
        data[c.name] = values.astype(np.float32)
    return EmbeddingDataset(ids, data)


# ---------------------------------------------------------------------------
# CSV


def to_csv(ds: EmbeddingDataset) -> str:
    dims = {a.shape[2] for a in ds.data.values()}
    if len(dims) != 1:
        raise ConfigurationError(f"CSV needs one embedding dimension, got {sorted(dims)}")
    d = dims.pop()
    buf = io.StringIO()
    buf.write(",".join(["subject_id", "characteristic", "sample_id"]
                       + [f"v{i}" for i in range(d)]) + "\n")
    for c, arr in ds.data.items():
        for i, sid in enumerate(ds.subject_ids):
            for j in range(arr.shape[1]):
                buf.write(f"{sid},{c},{j},")
                buf.write(",".join(["%.9g" % v for v in arr[i, j].tolist()]))
                buf.write("\n")
    return buf.getvalue()


def store_csv(path, ds: EmbeddingDataset) -> None:
    atomic_write_text(path, to_csv(ds))


def load_csv(path) -> EmbeddingDataset:
    """Parse a CSV dataset; any defect raises :class:`DataFormatError`."""
    rows: dict[str, dict[str, dict[int, np.ndarray]]] = {}
    subject_order: dict[str, None] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError("empty file", 1) from None
        if header[:3] != ["subject_id", "characteristic", "sample_id"] or len(header) < 4:
            raise DataFormatError("bad header", 1)
        d = len(header) - 3
        if header[3:] != [f"v{i}" for i in range(d)]:
            raise DataFormatError("value columns must be v0..v{d-1}", 1)
        for record in reader:
            line = reader.line_num
            if len(record) != d + 3:
                raise DataFormatError(f"expected {d + 3} fields, got {len(record)}", line)
            sid, c, sample = record[0], record[1], record[2]
            if not sid or not c:
                raise DataFormatError("empty subject_id or characteristic", line)
            try:
                j = int(sample)
                values = np.array([float(x) for x in record[3:]], dtype=np.float32)
            except ValueError as exc:
                raise DataFormatError(str(exc), line) from None
            if not np.isfinite(values).all():
                raise DataFormatError("non-finite value", line)
            samples = rows.setdefault(c, {}).setdefault(sid, {})
            subject_order.setdefault(sid, None)
            if j in samples:
                raise DataFormatError(f"duplicate sample {sid}/{c}/{j}", line)
            samples[j] = values
    if not rows:
        raise DataFormatError("no data rows", 2)
    return _assemble(list(subject_order), rows)


def _assemble(subject_order, rows) -> EmbeddingDataset:
    data = {}
    for c, per_subject in rows.items():
        if set(per_subject) != set(subject_order):
            raise DataFormatError(f"{c}: not every subject has samples")
        counts = {len(s) for s in per_subject.values()}
        if len(counts) != 1:
            raise DataFormatError(f"{c}: subjects have differing sample counts {sorted(counts)}")
        ns = counts.pop()
        if ns < 2:
            raise DataFormatError(f"{c}: every identity needs >= 2 samples")
        arr = []
        for sid in subject_order:
            samples = per_subject[sid]
            if sorted(samples) != list(range(ns)):
                raise DataFormatError(f"{c}/{sid}: sample ids must be 0..{ns - 1}")
            arr.append([samples[j] for j in range(ns)])
        data[c] = np.array(arr, dtype=np.float32)
    ds = EmbeddingDataset(tuple(subject_order), data)
    ds.validate()
    return ds


# ---------------------------------------------------------------------------
# binary container


def store_binary(stem, ds: EmbeddingDataset) -> None:
    stem = Path(stem)
    chars, offset, blobs = [], 0, []
    for c, arr in ds.data.items():
        blob = np.ascontiguousarray(arr, dtype="<f4").tobytes()
        chars.append({"name": c, "subjects": int(arr.shape[0]), "samples": int(arr.shape[1]),
                      "dim": int(arr.shape[2]), "offset": offset, "nbytes": len(blob)})
        offset += len(blob)
        blobs.append(blob)
    manifest = {"format": BINARY_FORMAT, "version": BINARY_VERSION, "dtype": "<f4",
                "data_file": stem.with_suffix(".bin").name,
                "subject_ids": list(ds.subject_ids), "characteristics": chars}
    bin_path = stem.with_suffix(".bin")
    bin_path.parent.mkdir(parents=True, exist_ok=True)
    tmp = bin_path.with_name(f".{bin_path.name}.tmp")
    tmp.write_bytes(b"".join(blobs))
    tmp.replace(bin_path)
    atomic_write_text(stem.with_suffix(".json"), json.dumps(manifest, indent=1) + "\n")


def load_binary(stem) -> EmbeddingDataset:
    stem = Path(stem)
    try:
        manifest = json.loads(stem.with_suffix(".json").read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"manifest: {exc.msg}", exc.lineno) from None
    if manifest.get("format") != BINARY_FORMAT or manifest.get("version") != BINARY_VERSION:
        raise DataFormatError("not an embedding container manifest")
    raw = (stem.parent / manifest["data_file"]).read_bytes()
    ids = tuple(manifest["subject_ids"])
    data = {}
    for entry in manifest["characteristics"]:
        shape = (entry["subjects"], entry["samples"], entry["dim"])
        end = entry["offset"] + entry["nbytes"]
        if end > len(raw) or entry["nbytes"] != 4 * int(np.prod(shape)):
            raise DataFormatError(f"{entry['name']}: data file truncated or inconsistent")
        data[entry["name"]] = np.frombuffer(raw[entry["offset"]:end], dtype="<f4").reshape(
            shape).astype(np.float32)
    ds = EmbeddingDataset(ids, data)
    ds.validate()
    return ds


def load(path) -> EmbeddingDataset:
    """Load a dataset; ``.csv`` files as CSV, anything else as a binary container."""
    path = Path(path)
    if not path.exists() and not path.with_suffix(".json").exists():
        raise DataFormatError(f"no such dataset: {path}")
    if path.suffix.lower() == ".csv":
        return load_csv(path)
    return load_binary(path)


def store(path, ds: EmbeddingDataset) -> None:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        store_csv(path, ds)
    else:
        store_binary(path, ds)
