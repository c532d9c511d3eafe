"""Cancelable template protection.

Three schemes turn a real-valued embedding into a protected template:

* ``sign`` -- unprotected baseline, one bit per dimension (``x >= 0``).
* ``biohashing`` -- projection onto ``l`` orthonormalized Gaussian vectors,
  each projection thresholded at zero.
* ``iom-grp`` -- Index-of-Maximum hashing with Gaussian random projection:
  for each of ``m_ints`` slots the index of the largest of ``q`` Gaussian
  projections.  For pattern extraction the integers are written as
  ``ceil(log2 q)``-bit big-endian codes; scoring uses integer collisions.

Keys follow the stolen-token setting: one :class:`SchemeKey` per
characteristic, shared by every subject and probe of that characteristic.
Random vectors come from :mod:`fbpindex.rng`, so templates are reproducible
from the key seed alone.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .bitcore import BinaryTemplate
from .errors import ConfigurationError, DimensionError


class Scheme(str, enum.Enum):
    SIGN = "sign"
    BIOHASHING = "biohashing"
    IOM_GRP = "iom-grp"

    @classmethod
    def parse(cls, name: "str | Scheme") -> "Scheme":
        if isinstance(name, Scheme):
            return name
        aliases = {"baseline": cls.SIGN, "signbaseline": cls.SIGN, "biohash": cls.BIOHASHING,
                   "iom": cls.IOM_GRP, "iomgrp": cls.IOM_GRP, "iom_grp": cls.IOM_GRP}
        key = str(name).strip().lower()
        try:
            return cls(key)
        except ValueError:
            if key in aliases:
                return aliases[key]
            raise ConfigurationError(f"unknown protection scheme {name!r}") from None


@dataclass(frozen=True)
class SchemeKey:
    scheme: Scheme
    seed: int
    characteristic: str = ""

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if not 0 <= int(self.seed) < 1 << 64:
            raise ConfigurationError("key seed must be an unsigned 64-bit integer")


@dataclass(frozen=True, eq=False)
class IntegerTemplate:
    """IoM-GRP output: ``m_ints`` integers, each in ``[0, q)``."""

    ints: np.ndarray
    q: int

    def __post_init__(self):
        arr = np.array(self.ints, dtype=np.int64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("integer template must be a non-empty 1-D sequence")
        if arr.min() < 0 or arr.max() >= self.q:
            raise ValueError(f"integer template entries must lie in [0, {self.q})")
        arr.flags.writeable = False
        object.__setattr__(self, "ints", arr)

    @property
    def m_ints(self) -> int:
        return int(self.ints.size)

    def __eq__(self, other):
        if not isinstance(other, IntegerTemplate):
            return NotImplemented
        return self.q == other.q and bool(np.array_equal(self.ints, other.ints))

    def __hash__(self):
        return hash((self.q, self.ints.tobytes()))


def _embedding_matrix(e) -> np.ndarray:
    arr = np.asarray(e, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise DimensionError("embeddings must be 1-D or a 2-D stack")
    if not np.isfinite(arr).all():
        raise ValueError("embedding values must be finite")
    return arr


# ---------------------------------------------------------------------------
# random matrices


def biohash_matrix(seed: int, d: int, l: int) -> np.ndarray:
    """``l x d`` matrix of orthonormal rows.

    Rows are Gaussian vectors orthonormalized in order (Gram-Schmidt).  QR
    with the sign of ``R``'s diagonal forced positive gives exactly the
    Gram-Schmidt basis.
    """
    if l > d:
        raise ValueError(f"cannot orthonormalize {l} vectors in {d} dimensions")
    if l < 1:
        raise ValueError("output length l must be >= 1")
    raw = rng.gaussian(seed, rng.stream_id("biohashing", d, l), l * d).reshape(l, d)
    q, r = np.linalg.qr(raw.T)
    signs = np.where(np.diag(r) < 0, -1.0, 1.0)
    return (q * signs).T


def iom_vectors(seed: int, d: int, m_ints: int, q: int) -> np.ndarray:
    """``m_ints x q x d`` Gaussian projection vectors; slot ``j`` has its own stream."""
    out = np.empty((m_ints, q, d), dtype=np.float64)
    for j in range(m_ints):
        out[j] = rng.gaussian(seed, rng.stream_id("iom-grp", d, q, j), q * d).reshape(q, d)
    return out


# ---------------------------------------------------------------------------
# single-embedding transforms


def sign_binarize(e) -> BinaryTemplate:
    """Bit ``i`` is 1 when ``e[i] >= 0``."""
    return BinaryTemplate(sign_bits(e)[0])


def biohash(e, key: SchemeKey, l: int = 512, matrix: np.ndarray | None = None) -> BinaryTemplate:
    """BioHash of one embedding.

    ``matrix`` (``l x d``) bypasses key-derived projection vectors; it is used
    as given, without orthonormalization.
    """
    arr = _embedding_matrix(e)
    if matrix is None:
        matrix = biohash_matrix(key.seed, arr.shape[1], l)
    return BinaryTemplate(project_bits(arr, matrix)[0])


def iom_grp(e, key: SchemeKey, m_ints: int = 512, q: int = 16,
            vectors: np.ndarray | None = None) -> IntegerTemplate:
    """IoM-GRP integers of one embedding.

    ``vectors`` (``m_ints x q x d``) replaces the key-derived projections.
    """
    if m_ints < 1 or q < 2:
        raise ValueError("IoM-GRP needs m_ints >= 1 and q >= 2")
    arr = _embedding_matrix(e)
    if vectors is None:
        vectors = iom_vectors(key.seed, arr.shape[1], m_ints, q)
    return IntegerTemplate(argmax_indices(arr, vectors)[0], q)


def code_width(q: int) -> int:
    """Bits per IoM integer; ``q`` must be a power of two."""
    if q < 2 or q & (q - 1):
        raise ConfigurationError(f"q={q} is not a power of two >= 2")
    return q.bit_length() - 1


def iom_encode(t: IntegerTemplate) -> BinaryTemplate:
    """Concatenate ``ceil(log2 q)``-bit big-endian codes of each integer."""
    return BinaryTemplate(encode_ints(t.ints[None, :], t.q)[0])


def iom_decode(f: BinaryTemplate, q: int) -> IntegerTemplate:
    width = code_width(q)
    if f.n % width:
        raise DimensionError(f"{f.n} bits is not a multiple of the {width}-bit code width")
    codes = f.bits.reshape(-1, width).astype(np.int64)
    weights = 1 << np.arange(width - 1, -1, -1)
    return IntegerTemplate(codes @ weights, q)


def similarity(a, b, scheme: "Scheme | str") -> float:
    """Native comparison score in ``[0, 1]``.

    Binary schemes: ``(n - hamming) / n``.  IoM-GRP: fraction of slots with
    equal integers; its binary encoding is never scored.
    """
    scheme = Scheme.parse(scheme)
    if scheme is Scheme.IOM_GRP:
        if not (isinstance(a, IntegerTemplate) and isinstance(b, IntegerTemplate)):
            raise DimensionError("IoM-GRP similarity compares integer templates")
        if a.m_ints != b.m_ints or a.q != b.q:
            raise DimensionError("integer templates differ in size or q")
        return int(np.count_nonzero(a.ints == b.ints)) / a.m_ints
    if not (isinstance(a, BinaryTemplate) and isinstance(b, BinaryTemplate)):
        raise DimensionError(f"{scheme.value} similarity compares binary templates")
    if a.n != b.n:
        raise DimensionError(f"length mismatch: {a.n} vs {b.n}")
    return (a.n - int(np.count_nonzero(a.bits != b.bits))) / a.n


# ---------------------------------------------------------------------------
# batch kernels (rows are embeddings / templates)


def sign_bits(e) -> np.ndarray:
    return (_embedding_matrix(e) >= 0).astype(np.uint8)


def project_bits(embeddings: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    embeddings = _embedding_matrix(embeddings)
    if matrix.shape[1] != embeddings.shape[1]:
        raise DimensionError("projection matrix and embeddings differ in dimension")
    return (embeddings @ matrix.T >= 0).astype(np.uint8)


def argmax_indices(embeddings: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    embeddings = _embedding_matrix(embeddings)
    m_ints, q, d = vectors.shape
    if d != embeddings.shape[1]:
        raise DimensionError("projection vectors and embeddings differ in dimension")
    proj = embeddings @ vectors.reshape(m_ints * q, d).T
    return np.argmax(proj.reshape(-1, m_ints, q), axis=2).astype(np.int64)


def encode_ints(ints: np.ndarray, q: int) -> np.ndarray:
    width = code_width(q)
    ints = np.asarray(ints, dtype=np.int64)
    shifts = np.arange(width - 1, -1, -1)
    bits = (ints[..., None] >> shifts) & 1
    return bits.reshape(*ints.shape[:-1], -1).astype(np.uint8)


def hamming_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise Hamming distances between bit rows of ``a`` and ``b``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-1] != b.shape[-1]:
        raise DimensionError("bit rows differ in length")
    pa = 2.0 * a - 1.0
    pb = 2.0 * b - 1.0
    agree = pa @ pb.T
    return np.rint((a.shape[-1] - agree) / 2).astype(np.int64)


def collision_matrix(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    """Pairwise counts of equal slots between integer rows of ``a`` and ``b``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[-1] != b.shape[-1]:
        raise DimensionError("integer rows differ in length")
    m_ints = a.shape[-1]
    slots = np.arange(m_ints) * q
    oa = np.zeros((a.shape[0], m_ints * q), dtype=np.float32)
    ob = np.zeros((b.shape[0], m_ints * q), dtype=np.float32)
    oa[np.arange(a.shape[0])[:, None], slots + a] = 1.0
    ob[np.arange(b.shape[0])[:, None], slots + b] = 1.0
    return np.rint(oa @ ob.T).astype(np.int64)


@dataclass(frozen=True)
class ProtectedBatch:
    """Protected templates of a stack of embeddings.

    ``bits`` is always present (used for pattern extraction); ``ints`` only
    for IoM-GRP, where it is the scored representation.
    """

    scheme: Scheme
    bits: np.ndarray
    ints: np.ndarray | None = None
    q: int | None = None

    def __len__(self):
        return self.bits.shape[0]

    @property
    def n_bits(self) -> int:
        return int(self.bits.shape[-1])

    def take(self, index) -> "ProtectedBatch":
        return ProtectedBatch(self.scheme, self.bits[index],
                              None if self.ints is None else self.ints[index], self.q)

    def binary(self, i: int) -> BinaryTemplate:
        return BinaryTemplate(self.bits[i])

    def scored(self, i: int):
        """The template that :func:`similarity` consumes for row ``i``."""
        if self.scheme is Scheme.IOM_GRP:
            return IntegerTemplate(self.ints[i], self.q)
        return BinaryTemplate(self.bits[i])

    def similarity_counts(self, other: "ProtectedBatch") -> tuple[np.ndarray, int]:
        """Agreement counts (rows of self x rows of other) and their denominator.

        Similarity is ``counts / denominator``; kept integral so that batch
        and single-pair scoring round identically.
        """
        if self.scheme is not other.scheme:
            raise DimensionError("batches use different schemes")
        if self.scheme is Scheme.IOM_GRP:
            m_ints = self.ints.shape[-1]
            return collision_matrix(self.ints, other.ints, self.q), m_ints
        n = self.n_bits
        return n - hamming_matrix(self.bits, other.bits), n


@dataclass(frozen=True)
class Protector:
    """A scheme bound to a key and output size, with cached random vectors.

    ``length`` is ``l`` for BioHashing; ``m_ints``/``q`` configure IoM-GRP.
    """

    key: SchemeKey
    length: int = 512
    m_ints: int = 512
    q: int = 16
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def scheme(self) -> Scheme:
        return self.key.scheme

    def n_bits(self, d: int) -> int:
        if self.scheme is Scheme.SIGN:
            return d
        if self.scheme is Scheme.BIOHASHING:
            return self.length
        return self.m_ints * code_width(self.q)

    def _matrix(self, d: int) -> np.ndarray:
        if d not in self._cache:
            if self.scheme is Scheme.BIOHASHING:
                self._cache[d] = biohash_matrix(self.key.seed, d, self.length)
            else:
                self._cache[d] = iom_vectors(self.key.seed, d, self.m_ints, self.q)
        return self._cache[d]

    def protect(self, embeddings) -> ProtectedBatch:
        arr = _embedding_matrix(embeddings)
        if self.scheme is Scheme.SIGN:
            return ProtectedBatch(self.scheme, sign_bits(arr))
        if self.scheme is Scheme.BIOHASHING:
            return ProtectedBatch(self.scheme, project_bits(arr, self._matrix(arr.shape[1])))
        code_width(self.q)
        ints = argmax_indices(arr, self._matrix(arr.shape[1]))
        return ProtectedBatch(self.scheme, encode_ints(ints, self.q), ints, self.q)

    def describe(self) -> dict:
        out = {"scheme": self.scheme.value, "seed": int(self.key.seed),
               "characteristic": self.key.characteristic}
        if self.scheme is Scheme.BIOHASHING:
            out["length"] = self.length
        elif self.scheme is Scheme.IOM_GRP:
            out.update(m_ints=self.m_ints, q=self.q)
        return out
