"""Closed-set and open-set identification benchmarks.

Protocol
--------
A fixed set of ``calibration_identities`` is split off first; their mated
and non-mated scores give the z-score statistics of every characteristic.
The remaining identities are partitioned into ``folds`` parts.  Fold ``f``
enrols every identity outside part ``f``; for each identity and
characteristic two samples are drawn at random, one for enrolment and one
for search.  The draws depend only on the seed, the fold, and the
characteristic name, so they are shared by all configurations.

Closed set: every enrolled identity is searched over its full probe
sequence.  A probe's cost is the comparisons spent up to and including the
bin holding its mate (or the whole sequence on a miss).  With ``N`` enrolled
subjects and ``m`` characteristics, ``W_l = mean / (N m)`` and
``W_u = (mean + std) / (N m)``.

Open set: additionally a fraction ``open_set_split`` of each fold's
identities is withheld from enrolment and searched as non-mated probes.  The
search visits a fixed number of bins ``t``, by default
``ceil(mean + std)`` of the closed-set bins visited.  For a threshold
``tau``, FPIR is the fraction of non-mated searches whose best candidate
scores ``>= tau``; FNIR the fraction of mated searches whose mate was not
retrieved or scores ``< tau``.

All standard deviations are population standard deviations.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import rng
from .datagen import EmbeddingDataset
from .errors import ConfigurationError, ProtocolError
from .index import BinTable, Strategy, build_from_batches
from .protect import ProtectedBatch, Protector, Scheme, SchemeKey
from .retrieve import probe_sequences, visit_plan
from .scores import NormStats, fuse

SCHEMA_VERSION = 1
EXHAUSTIVE = "exhaustive"


@dataclass(frozen=True)
class SchemeConfig:
    """Protection scheme settings; each characteristic gets its own key seed."""

    name: str = "biohashing"
    seed: int = 1
    length: int = 512
    m_ints: int = 512
    q: int = 16

    def __post_init__(self):
        object.__setattr__(self, "name", Scheme.parse(self.name).value)

    def protector(self, characteristic: str) -> Protector:
        key = SchemeKey(Scheme.parse(self.name), characteristic_seed(self.seed, characteristic),
                        characteristic)
        return Protector(key, self.length, self.m_ints, self.q)


def characteristic_seed(seed: int, characteristic: str) -> int:
    return rng.stream_id("scheme-key", seed, characteristic)


@dataclass(frozen=True)
class Protocol:
    folds: int = 10
    seed: int = 0
    k_range: tuple[int, ...] = (3, 4, 5, 6, 7, 8)
    t_policy: "str | int" = "closed_set_derived"
    open_set_split: float = 0.2
    calibration_identities: int = 50
    skip_empty_bins: bool = False
    fpir_targets: tuple[float, ...] = (0.01, 0.1)
    samples_per_instance: int = 2

    def __post_init__(self):
        if self.folds < 2:
            raise ConfigurationError("folds must be >= 2")
        if self.samples_per_instance != 2:
            raise ConfigurationError("the protocol uses exactly two samples per instance")
        if not 0 < self.open_set_split < 1:
            raise ConfigurationError("open_set_split must lie in (0, 1)")
        if self.calibration_identities < 2:
            raise ConfigurationError("need >= 2 calibration identities")
        if not (self.t_policy == "closed_set_derived"
                or (isinstance(self.t_policy, int) and self.t_policy >= 1)):
            raise ConfigurationError("t_policy is 'closed_set_derived' or a positive integer")


def _pstd(values) -> float:
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.std()) if arr.size else 0.0


def _mean(values) -> float:
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()) if arr.size else 0.0


@dataclass
class FoldStats:
    fold: int
    n_enrolled: int
    m: int
    n_probes: int
    hit_rate: float
    mean_comparisons: float
    std_comparisons: float
    W_l: float
    W_u: float
    mean_bins_visited: float
    std_bins_visited: float
    n_nonmated: int = 0
    t: int | None = None


@dataclass
class EvalReport:
    """Metrics of one configuration; ``logs`` keeps the raw per-probe values."""

    config: dict
    folds: list[FoldStats]
    hit_rate: float
    mean_comparisons: float
    std_comparisons: float
    W_l: float
    W_u: float
    mean_bins_visited: float
    std_bins_visited: float
    W_open: float | None = None
    t: int | None = None
    det: list[tuple[float, float, float]] = field(default_factory=list)
    fnir_at_fpir: dict[str, float] = field(default_factory=dict)
    logs: dict[str, list] = field(default_factory=dict)

    def metrics(self) -> dict:
        """Every number of the report, without the configuration block."""
        out = self.to_dict()
        out.pop("config")
        out.pop("schema_version")
        return out

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config,
            "folds": [asdict(f) for f in self.folds],
            "hit_rate": self.hit_rate,
            "mean_comparisons": self.mean_comparisons,
            "std_comparisons": self.std_comparisons,
            "W_l": self.W_l,
            "W_u": self.W_u,
            "mean_bins_visited": self.mean_bins_visited,
            "std_bins_visited": self.std_bins_visited,
            "W_open": self.W_open,
            "t": self.t,
            "det": [[_json_number(tau), fpir, fnir] for tau, fpir, fnir in self.det],
            "fnir_at_fpir": self.fnir_at_fpir,
            "logs": self.logs,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1, default=_json_default) + "\n"

    def csv_row(self) -> dict:
        c = self.config
        row = {
            "mode": c["mode"],
            "characteristics": "-".join(c["characteristics"]),
            "scheme": c["scheme"],
            "strategy": c["strategy"],
            "k": "" if c.get("k") is None else c["k"],
            "n_comb": "" if c.get("k") is None else 1 << c["k"],
            "comp": self.mean_comparisons,
            "std_comp": self.std_comparisons,
            "W_u_pct": 100.0 * self.W_u,
            "W_l_pct": 100.0 * self.W_l,
            "visited_patterns": self.mean_bins_visited,
            "std_bins_v": self.std_bins_visited,
            "hit_rate_pct": 100.0 * self.hit_rate,
            "t": "" if self.t is None else self.t,
            "W_pct": "" if self.W_open is None else 100.0 * self.W_open,
        }
        for target, value in sorted(self.fnir_at_fpir.items()):
            row[f"fnir_pct_at_fpir_{target}"] = 100.0 * value
        return row


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _json_number(x: float):
    """JSON has no infinities; thresholds at +-inf are written as strings."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def reports_to_csv(reports: Sequence[EvalReport]) -> str:
    """One row per report; the union of all columns in first-seen order."""
    rows = [r.csv_row() for r in reports]
    columns: list[str] = []
    for row in rows:
        columns.extend(col for col in row if col not in columns)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return buf.getvalue()


def det_to_csv(reports: Sequence[EvalReport]) -> str:
    """Tidy DET points: one row per (configuration, threshold)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["characteristics", "scheme", "strategy", "k", "threshold", "fpir", "fnir"])
    for r in reports:
        c = r.config
        for tau, fpir, fnir in r.det:
            writer.writerow(["-".join(c["characteristics"]), c["scheme"], c["strategy"],
                             "" if c.get("k") is None else c["k"], _json_number(tau), repr(fpir),
                             repr(fnir)])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# DET helpers


def det_curve(mate_scores: np.ndarray, nonmated_top: np.ndarray):
    """DET points over every observed score plus both infinities.

    ``mate_scores`` is NaN where the mate was not retrieved; ``nonmated_top``
    is NaN where a non-mated search returned no candidate.
    """
    mate_scores = np.asarray(mate_scores, dtype=np.float64)
    nonmated_top = np.asarray(nonmated_top, dtype=np.float64)
    observed = np.concatenate([mate_scores[~np.isnan(mate_scores)],
                               nonmated_top[~np.isnan(nonmated_top)]])
    thresholds = np.concatenate([[-np.inf], np.unique(observed), [np.inf]])
    mates = np.sort(mate_scores[~np.isnan(mate_scores)])
    nonm = np.sort(nonmated_top[~np.isnan(nonmated_top)])
    n_mated = max(mate_scores.size, 1)
    n_nonmated = max(nonmated_top.size, 1)
    missed = mate_scores.size - mates.size
    # FNIR: missed or mate score < tau; FPIR: top score >= tau
    below = np.searchsorted(mates, thresholds, side="left")
    at_or_above = nonm.size - np.searchsorted(nonm, thresholds, side="left")
    fnir = (missed + below) / n_mated
    fpir = at_or_above / n_nonmated
    return thresholds, fpir, fnir


def fnir_at(fpir: np.ndarray, fnir: np.ndarray, target: float) -> float:
    """FNIR at an FPIR operating point by linear interpolation of the DET points."""
    levels = np.unique(fpir)
    best = np.array([fnir[fpir == lv].min() for lv in levels])
    return float(np.interp(target, levels, best))


# ---------------------------------------------------------------------------
# benchmark engine


@dataclass
class _Fold:
    index: int
    enrolled: np.ndarray
    held_out: np.ndarray
    enrol_sample: dict[str, np.ndarray]
    probe_sample: dict[str, np.ndarray]


class Bench:
    """Protected data, splits, and calibration for one dataset and scheme.

    Protection is done once per characteristic; every run reuses it.
    """

    def __init__(self, dataset: EmbeddingDataset, scheme: SchemeConfig | Mapping | None = None,
                 protocol: Protocol | None = None, characteristics: Sequence[str] | None = None):
        self.dataset = dataset
        self.scheme = scheme if isinstance(scheme, SchemeConfig) else SchemeConfig(**(scheme or {}))
        self.protocol = protocol or Protocol()
        self.characteristics = tuple(characteristics or dataset.characteristics)
        for c in self.characteristics:
            if c not in dataset.data:
                raise ConfigurationError(f"dataset has no characteristic {c!r}")
        self._protected: dict[str, ProtectedBatch] = {}
        self._calibration: dict[str, NormStats] | None = None
        self._split()

    # -- data -------------------------------------------------------------

    def protected(self, c: str) -> ProtectedBatch:
        """All samples of characteristic ``c``, rows ordered ``[subject, sample]``."""
        if c not in self._protected:
            arr = self.dataset.data[c]
            s, ns, d = arr.shape
            self._protected[c] = self.scheme.protector(c).protect(arr.reshape(s * ns, d))
        return self._protected[c]

    def _rows(self, c: str, subjects: np.ndarray, samples: np.ndarray) -> ProtectedBatch:
        ns = self.dataset.data[c].shape[1]
        return self.protected(c).take(subjects * ns + samples)

    def _draw_pair(self, stream: int, c: str, subjects: np.ndarray):
        ns = self.dataset.data[c].shape[1]
        keys = rng.raw_u64(self.protocol.seed, stream, self.dataset.n_subjects * ns)
        order = np.argsort(keys.reshape(-1, ns), axis=1, kind="stable")
        return order[subjects, 0], order[subjects, 1]

    def _split(self) -> None:
        p = self.protocol
        n = self.dataset.n_subjects
        n_cal = p.calibration_identities
        if n - n_cal < 2 * p.folds:
            raise ProtocolError(
                f"{n} identities cannot supply {n_cal} calibration identities and {p.folds} folds")
        perm = rng.permutation(p.seed, rng.stream_id("identity-split"), n)
        self.calibration_subjects = np.sort(perm[:n_cal])
        pool = perm[n_cal:]
        parts = np.array_split(pool, p.folds)
        self.folds: list[_Fold] = []
        for f in range(p.folds):
            enrolled = np.sort(np.concatenate([parts[g] for g in range(p.folds) if g != f]))
            held = rng.permutation(p.seed, rng.stream_id("open-set", f), enrolled.size)
            n_out = max(1, int(round(p.open_set_split * enrolled.size)))
            held_out = np.sort(enrolled[held[:n_out]])
            enrol_s, probe_s = {}, {}
            for c in self.characteristics:
                e, q = self._draw_pair(rng.stream_id("samples", f, c), c, np.arange(n))
                enrol_s[c], probe_s[c] = e, q
            self.folds.append(_Fold(f, enrolled, held_out, enrol_s, probe_s))

    @property
    def calibration(self) -> dict[str, NormStats]:
        """Z-score statistics over all calibration comparisons (mated and non-mated)."""
        if self._calibration is None:
            subjects = self.calibration_subjects
            stats = {}
            for c in sorted(self.characteristics):
                e, q = self._draw_pair(rng.stream_id("calibration", c), c, subjects)
                enrol = self._rows(c, subjects, e)
                probe = self._rows(c, subjects, q)
                counts, denom = probe.similarity_counts(enrol)
                stats[c] = NormStats.from_scores(counts / denom)
                if not stats[c].std > 0:
                    raise ConfigurationError(f"{c}: calibration scores have zero spread")
            self._calibration = stats
        return self._calibration

    def _batches(self, fold: _Fold, subjects: np.ndarray, which: str) -> dict[str, ProtectedBatch]:
        sample = fold.enrol_sample if which == "enrol" else fold.probe_sample
        return {c: self._rows(c, subjects, sample[c][subjects]) for c in self.characteristics}

    def subject_ids(self, rows: np.ndarray) -> tuple[str, ...]:
        return tuple(self.dataset.subject_ids[i] for i in rows)

    def build(self, fold: _Fold, enrolled: np.ndarray, strategy, k: int) -> BinTable:
        batches = self._batches(fold, enrolled, "enrol")
        schemes = {c: self.scheme.protector(c).describe() for c in self.characteristics}
        return build_from_batches(self.subject_ids(enrolled), batches, strategy, k,
                                  self.characteristics, schemes, self.calibration)

    def _config(self, mode: str, strategy, k) -> dict:
        strategy_name = EXHAUSTIVE if strategy in (None, EXHAUSTIVE) else Strategy.parse(strategy).value
        return {"mode": mode, "strategy": strategy_name, "k": None if strategy_name == EXHAUSTIVE else k,
                "scheme": self.scheme.name, "scheme_seed": self.scheme.seed,
                "characteristics": list(self.characteristics), "folds": self.protocol.folds,
                "seed": self.protocol.seed, "skip_empty_bins": self.protocol.skip_empty_bins}

    # -- closed set --------------------------------------------------------

    def _closed_fold(self, fold: _Fold, strategy, k: int):
        m = len(self.characteristics)
        enrolled = fold.enrolled
        n = enrolled.size
        if strategy in (None, EXHAUSTIVE):
            comps = np.full(n, n * m, dtype=np.int64)
            return dict(found=np.ones(n, bool), comparisons=comps, bins=np.zeros(n, np.int64),
                        full_comparisons=comps.copy(), mate_pos=np.zeros(n, np.int64),
                        sizes=None), None
        bt = self.build(fold, enrolled, strategy, k)
        probes = self._batches(fold, enrolled, "probe")
        seqs = probe_sequences({c: b.bits for c, b in probes.items()}, self.characteristics,
                               bt.strategy, k)
        occ = bt.occupancy
        found = np.zeros(n, bool)
        comps = np.zeros(n, np.int64)
        full = np.zeros(n, np.int64)
        bins = np.zeros(n, np.int64)
        mate_pos = np.full(n, -1, np.int64)
        sizes_per_probe = []
        for i, seq in enumerate(seqs):
            seq = visit_plan(seq, occ, seq.size, self.protocol.skip_empty_bins)
            sizes = occ[seq] * m
            cum = np.cumsum(sizes)
            sizes_per_probe.append(sizes)
            hits = np.flatnonzero(seq == bt.assignment[i])
            full[i] = cum[-1] if cum.size else 0
            if hits.size:
                pos = int(hits[0])
                found[i] = True
                mate_pos[i] = pos
                comps[i] = cum[pos]
                bins[i] = pos + 1
            else:
                comps[i] = full[i]
                bins[i] = seq.size
        return dict(found=found, comparisons=comps, bins=bins, full_comparisons=full,
                    mate_pos=mate_pos, sizes=sizes_per_probe), bt

    def closed_set(self, strategy, k: int | None = None) -> EvalReport:
        m = len(self.characteristics)
        fold_stats, logs = [], {"fold": [], "subject_id": [], "found": [], "comparisons": [],
                                "bins_visited": [], "n_enrolled": []}
        for fold in self.folds:
            res, _ = self._closed_fold(fold, strategy, k)
            n = fold.enrolled.size
            comps = res["comparisons"]
            mean_c, std_c = _mean(comps), _pstd(comps)
            fold_stats.append(FoldStats(
                fold.index, n, m, n, float(res["found"].mean()), mean_c, std_c,
                mean_c / (n * m), (mean_c + std_c) / (n * m),
                _mean(res["bins"]), _pstd(res["bins"])))
            logs["fold"] += [fold.index] * n
            logs["subject_id"] += list(self.subject_ids(fold.enrolled))
            logs["found"] += res["found"].tolist()
            logs["comparisons"] += comps.tolist()
            logs["bins_visited"] += res["bins"].tolist()
            logs["n_enrolled"] += [n] * n
        comps = np.array(logs["comparisons"], dtype=np.float64)
        frac = comps / (np.array(logs["n_enrolled"], dtype=np.float64) * m)
        return EvalReport(
            config=self._config("closed", strategy, k), folds=fold_stats,
            hit_rate=_mean(logs["found"]), mean_comparisons=_mean(comps),
            std_comparisons=_pstd(comps), W_l=_mean(frac), W_u=_mean(frac) + _pstd(frac),
            mean_bins_visited=_mean(logs["bins_visited"]),
            std_bins_visited=_pstd(logs["bins_visited"]), logs=logs)

    def t_sweep(self, strategy, k: int) -> dict[str, np.ndarray]:
        """Closed-set hit rate and workload when at most ``t`` bins are visited, t = 1..2**k.

        ``W[t-1]`` averages ``m * sum of the first t visited bin sizes / (N m)``,
        i.e. the cost of a plain ``search(..., t)`` without early stopping.
        """
        m = len(self.characteristics)
        t_max = 1 << k
        hits = np.zeros(t_max)
        work = np.zeros(t_max)
        total = 0
        for fold in self.folds:
            res, _ = self._closed_fold(fold, strategy, k)
            n = fold.enrolled.size
            for pos, sizes in zip(res["mate_pos"], res["sizes"]):
                cum = np.cumsum(sizes)
                padded = np.concatenate([cum, np.full(t_max - cum.size, cum[-1] if cum.size else 0)])
                work += padded / (n * m)
                if pos >= 0:
                    hits[pos:] += 1
            total += n
        return {"t": np.arange(1, t_max + 1), "hit_rate": hits / total, "W": work / total}

    # -- open set ----------------------------------------------------------

    def derive_t(self, strategy, k: int) -> int:
        report = self.closed_set(strategy, k)
        t = math.ceil(report.mean_bins_visited + report.std_bins_visited)
        return int(min(max(t, 1), 1 << k))

    def open_set(self, strategy, k: int | None = None, t: int | None = None) -> EvalReport:
        m = len(self.characteristics)
        exhaustive = strategy in (None, EXHAUSTIVE)
        if not exhaustive:
            if t is None:
                policy = self.protocol.t_policy
                t = self.derive_t(strategy, k) if policy == "closed_set_derived" else int(policy)
            if not 1 <= t <= 1 << k:
                raise ConfigurationError(f"t={t} outside [1, {1 << k}]")
        calib = self.calibration
        fold_stats = []
        logs = {"fold": [], "subject_id": [], "mated": [], "mate_score": [], "top_score": [],
                "comparisons": [], "bins_visited": [], "n_enrolled": []}
        for fold in self.folds:
            held = set(fold.held_out.tolist())
            enrolled = np.array([s for s in fold.enrolled if s not in held], dtype=np.int64)
            nonmated = fold.held_out
            if nonmated.size == 0:
                raise ProtocolError("open-set fold without non-mated probes")
            n = enrolled.size
            probes_idx = np.concatenate([enrolled, nonmated])
            mated = np.concatenate([np.ones(n, bool), np.zeros(nonmated.size, bool)])
            enrol = self._batches(fold, enrolled, "enrol")
            probes = self._batches(fold, probes_idx, "probe")
            sims = {}
            for c in self.characteristics:
                counts, denom = probes[c].similarity_counts(enrol[c])
                sims[c] = counts / denom
            fused = fuse(sims, calib)
            if exhaustive:
                visits = [(np.arange(n), 0)] * probes_idx.size
            else:
                bt = self.build(fold, enrolled, strategy, k)
                seqs = probe_sequences({c: b.bits for c, b in probes.items()},
                                       self.characteristics, bt.strategy, k)
                visits = []
                for seq in seqs:
                    plan = visit_plan(seq, bt.occupancy, t, self.protocol.skip_empty_bins)
                    parts = [bt.members(v) for v in plan]
                    rows = np.concatenate(parts) if parts else np.empty(0, np.int64)
                    visits.append((rows, plan.size))
            comps, bins, mate_s, top_s = [], [], [], []
            for p, (rows, n_bins) in enumerate(visits):
                scores = fused[p, rows]
                comps.append(rows.size * m)
                bins.append(n_bins)
                top_s.append(float(scores.max()) if rows.size else math.nan)
                if mated[p] and np.any(rows == p):
                    mate_s.append(float(fused[p, p]))
                else:
                    mate_s.append(math.nan)
            comps_a = np.array(comps, dtype=np.float64)
            mated_hits = ~np.isnan(np.array(mate_s)[mated])
            mean_c, std_c = _mean(comps_a), _pstd(comps_a)
            fold_stats.append(FoldStats(
                fold.index, n, m, int(probes_idx.size), float(mated_hits.mean()), mean_c, std_c,
                mean_c / (n * m), (mean_c + std_c) / (n * m), _mean(bins), _pstd(bins),
                int(nonmated.size), t))
            logs["fold"] += [fold.index] * probes_idx.size
            logs["subject_id"] += list(self.subject_ids(probes_idx))
            logs["mated"] += mated.tolist()
            logs["mate_score"] += mate_s
            logs["top_score"] += top_s
            logs["comparisons"] += comps
            logs["bins_visited"] += bins
            logs["n_enrolled"] += [n] * probes_idx.size
        mated_all = np.array(logs["mated"])
        mate_scores = np.array(logs["mate_score"], dtype=np.float64)[mated_all]
        nonmated_top = np.array(logs["top_score"], dtype=np.float64)[~mated_all]
        thresholds, fpir, fnir = det_curve(mate_scores, nonmated_top)
        comps = np.array(logs["comparisons"], dtype=np.float64)
        frac = comps / (np.array(logs["n_enrolled"], dtype=np.float64) * m)
        report = EvalReport(
            config=self._config("open", strategy, k), folds=fold_stats,
            hit_rate=float((~np.isnan(mate_scores)).mean()),
            mean_comparisons=_mean(comps), std_comparisons=_pstd(comps),
            W_l=_mean(frac), W_u=_mean(frac) + _pstd(frac),
            mean_bins_visited=_mean(logs["bins_visited"]),
            std_bins_visited=_pstd(logs["bins_visited"]),
            W_open=_mean(frac), t=t,
            det=[(float(a), float(b), float(c))
                 for a, b, c in zip(thresholds, fpir, fnir)],
            fnir_at_fpir={str(x): fnir_at(fpir, fnir, x) for x in self.protocol.fpir_targets},
            logs={k_: [None if isinstance(v, float) and math.isnan(v) else v for v in vals]
                  for k_, vals in logs.items()})
        return report

    def k_sweep(self, strategy, k_range: Sequence[int] | None = None) -> list[EvalReport]:
        return [self.closed_set(strategy, k) for k in (k_range or self.protocol.k_range)]


def select_best_k(reports: Sequence[EvalReport], min_hit_rate: float = 0.99) -> EvalReport:
    """Lowest ``W_u`` among reports reaching ``min_hit_rate``; else the best hit rate."""
    eligible = [r for r in reports if r.hit_rate >= min_hit_rate]
    if eligible:
        return min(eligible, key=lambda r: (r.W_u, r.config["k"]))
    return max(reports, key=lambda r: (r.hit_rate, -r.W_u))


# ---------------------------------------------------------------------------
# functional entry points


def closed_set_run(dataset: EmbeddingDataset, strategy, scheme, k: int | None,
                   protocol: Protocol | None = None,
                   characteristics: Sequence[str] | None = None) -> EvalReport:
    return Bench(dataset, scheme, protocol, characteristics).closed_set(strategy, k)


def open_set_run(dataset: EmbeddingDataset, strategy, scheme, k: int | None,
                 t_fixed: int | None = None, protocol: Protocol | None = None,
                 characteristics: Sequence[str] | None = None) -> EvalReport:
    return Bench(dataset, scheme, protocol, characteristics).open_set(strategy, k, t_fixed)


def k_sweep(dataset: EmbeddingDataset, strategy, scheme, k_range: Sequence[int],
            protocol: Protocol | None = None,
            characteristics: Sequence[str] | None = None) -> list[EvalReport]:
    return Bench(dataset, scheme, protocol, characteristics).k_sweep(strategy, k_range)
