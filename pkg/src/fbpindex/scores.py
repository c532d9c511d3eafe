"""Z-score normalization and sum-rule fusion of per-characteristic scores."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class NormStats:
    """Mean and population standard deviation of calibration scores."""

    mean: float
    std: float

    @classmethod
    def from_scores(cls, scores) -> "NormStats":
        arr = np.asarray(scores, dtype=np.float64).ravel()
        if arr.size == 0:
            raise ConfigurationError("no calibration scores")
        return cls(float(arr.mean()), float(arr.std()))

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std}

    @classmethod
    def from_dict(cls, data: Mapping) -> "NormStats":
        return cls(float(data["mean"]), float(data["std"]))


def zscore_normalize(s, stats: NormStats):
    """``(s - mean) / std``; works on scalars and arrays."""
    if not stats.std > 0:
        raise ConfigurationError("degenerate calibration: standard deviation is zero")
    return (s - stats.mean) / stats.std


def fuse(similarities: Mapping[str, np.ndarray], calibration: Mapping[str, NormStats]) -> np.ndarray:
    """Sum of z-normalized similarities.

    Characteristics are summed in sorted-name order so the result does not
    depend on the order in which they were configured.
    """
    missing = set(similarities) - set(calibration)
    if missing:
        raise ConfigurationError(f"no calibration for characteristic(s) {sorted(missing)}")
    total = None
    for name in sorted(similarities):
        z = zscore_normalize(np.asarray(similarities[name], dtype=np.float64), calibration[name])
        total = z if total is None else total + z
    return total
