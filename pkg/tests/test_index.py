import json
from collections import Counter
from functools import reduce

import numpy as np
import pytest

from fbpindex.bitcore import BinaryTemplate, Pattern
from fbpindex.errors import DataFormatError, DimensionError, EnrollmentError
from fbpindex.index import (BinTable, EnrolRecord, Strategy, assign_bin, build,
                            occupancy_stats)
from fbpindex.protect import IntegerTemplate
from fbpindex.scores import NormStats

ORDER = ("face", "fingerprint", "iris")


def naive_counts(s, k):
    return Counter(int(s[i:i + k], 2) for i in range(len(s) - k + 1))


def naive_top(counter):
    best = max(counter.values())
    return min(v for v, c in counter.items() if c == best)


def naive_bin(strings, strategy, k):
    if strategy == "feature":
        return naive_top(naive_counts("".join(strings), k))
    counters = [naive_counts(s, k) for s in strings]
    if strategy == "ranked":
        merged = Counter()
        for c in counters:
            for v, n in c.items():
                merged[v] = max(merged[v], n)
        return naive_top(merged)
    return reduce(lambda a, b: a ^ b, (naive_top(c) for c in counters))


def random_records(rng, n, length=48, names=ORDER):
    return [EnrolRecord(f"s{i:03d}", {c: BinaryTemplate(rng.integers(0, 2, length))
                                      for c in names}) for i in range(n)]


def test_hand_examples():
    rec = EnrolRecord("x", {"a": BinaryTemplate.from_string("00000"),
                            "b": BinaryTemplate.from_string("01010")})
    assert assign_bin(rec, "ranked", 2, ["a", "b"]) == Pattern.from_string("00")
    assert assign_bin(rec, "xor", 2, ["a", "b"]) == Pattern.from_string("01")
    # feature concat "0000001010": 00 x5, 01 x2, 10 x2
    assert assign_bin(rec, "feature", 2, ["a", "b"]) == Pattern.from_string("00")


@pytest.mark.parametrize("strategy", ["feature", "ranked", "xor"])
def test_assignment_matches_naive_oracle(strategy, rng):
    for k in (1, 3, 5, 8):
        for rec in random_records(rng, 20):
            strings = [str(rec.templates[c]) for c in ORDER]
            assert assign_bin(rec, strategy, k, ORDER).value == naive_bin(strings, strategy, k)


def test_ranked_and_xor_ignore_order(rng):
    for rec in random_records(rng, 30):
        for strategy in ("ranked", "xor"):
            assert assign_bin(rec, strategy, 4, ORDER) == assign_bin(rec, strategy, 4, ORDER[::-1])


def test_unequal_lengths():
    rec = EnrolRecord("x", {"a": BinaryTemplate.from_string("0101"),
                            "b": BinaryTemplate.from_string("011011")})
    with pytest.raises(DimensionError):
        assign_bin(rec, "ranked", 2)
    assert assign_bin(rec, "feature", 2).k == 2


def test_build_partitions_subjects(rng):
    bt = build(random_records(rng, 60), "ranked", 4, ORDER)
    assert bt.m == 3 and bt.n_subjects == 60
    assert bt.occupancy.sum() == 60
    members = [set(ids) for ids in bt.bins.values()]
    assert set().union(*members) == set(bt.subject_ids)
    assert sum(len(m) for m in members) == 60
    for sid in bt.subject_ids[:10]:
        assert sid in bt.bins[bt.bin_of(sid)]
    sizes, mean, std = occupancy_stats(bt)
    assert sum(sizes) == 60 and mean == pytest.approx(np.mean(sizes))


def test_duplicate_subjects_rejected(rng):
    recs = random_records(rng, 3)
    with pytest.raises(EnrollmentError):
        build(recs + [recs[0]], "ranked", 3)
    with pytest.raises(EnrollmentError):
        build([], "ranked", 3)


def test_serialization_roundtrip(tmp_path, rng):
    recs = random_records(rng, 25)
    recs = [EnrolRecord(r.subject_id, r.templates,
                        {"iris": IntegerTemplate(rng.integers(0, 4, 24), 4)}) for r in recs]
    recs = [EnrolRecord(r.subject_id, {**r.templates, "iris": BinaryTemplate(
        np.repeat(r.integers["iris"].ints, 2) % 2)}, r.integers) for r in recs]
    calib = {c: NormStats(0.5, 0.1) for c in ORDER}
    bt = build(recs, "xor", 3, ORDER, calibration=calib,
               schemes={c: {"scheme": "sign", "seed": 0} for c in ORDER})
    path = tmp_path / "idx.json"
    bt.save(path)
    back = BinTable.load(path)
    assert back.to_json() == bt.to_json()
    assert back.bins == bt.bins
    assert back.record("s003").integers["iris"] == bt.record("s003").integers["iris"]
    assert back.calibration == calib


def test_tampered_scheme_header_rejected(tmp_path, rng):
    bt = build(random_records(rng, 5), "ranked", 3, ORDER,
               schemes={c: {"scheme": "biohashing", "seed": 1} for c in ORDER})
    data = json.loads(bt.to_json())
    data["header"]["schemes"]["face"]["seed"] = 2
    with pytest.raises(DataFormatError):
        BinTable.from_dict(data)
    data = json.loads(bt.to_json())
    del data["store"]
    with pytest.raises(DataFormatError):
        BinTable.from_dict(data)


def test_strategy_parse():
    assert Strategy.parse("RankedCodes") is Strategy.RANKED_CODES
    assert Strategy.parse("feature") is Strategy.FEATURE_CONCAT
