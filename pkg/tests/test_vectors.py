"""Fixed input/output vectors and small oracles, grouped by module."""

import json

import numpy as np
import pytest
from scipy.stats import spearmanr

from fbpindex import datagen
from fbpindex.bitcore import BinaryTemplate, Pattern, concat, hamming_distance, xor
from fbpindex.cli import main
from fbpindex.evalbench import Bench, Protocol, SchemeConfig, det_curve
from fbpindex.fbp import PatternList, extract_patterns, top_pattern
from fbpindex.index import EnrolRecord, assign_bin, build, occupancy_stats
from fbpindex.protect import (IntegerTemplate, Scheme, SchemeKey, biohash, iom_encode, iom_grp,
                              sign_binarize, similarity)
from fbpindex.retrieve import ProbeSet, exhaustive_search, probe_sequence, search, xor_sequence
from fbpindex.scores import NormStats, zscore_normalize

from conftest import small_spec

B = BinaryTemplate.from_string
P = Pattern.from_string


# -- bitcore -----------------------------------------------------------------

def test_hamming_random_pairs_match_loop(rng):
    for _ in range(1000):
        a, b = rng.integers(0, 2, 64), rng.integers(0, 2, 64)
        assert hamming_distance(BinaryTemplate(a), BinaryTemplate(b)) == sum(
            int(x != y) for x, y in zip(a, b))


def test_xor_vectors():
    assert xor(P("101"), P("011")) == P("110")
    assert xor(P("101"), P("000")) == P("101")
    assert xor(P("101"), P("011"), P("110")) == P("000")


def test_concat_vectors(rng):
    assert str(concat([B("01"), B("10")])) == "0110"
    assert concat([B("0110")]) == B("0110")
    parts = [BinaryTemplate(rng.integers(0, 2, 512)) for _ in range(3)]
    assert concat(parts).n == 1536


# -- protect -----------------------------------------------------------------

def test_sign_vectors(rng):
    assert str(sign_binarize([0.5, -0.2, 0.0])) == "101"
    assert str(sign_binarize(-np.ones(5))) == "00000"
    e = rng.normal(size=512)
    assert sign_binarize(e).bits.tolist() == [1 if x >= 0 else 0 for x in e]


def test_biohash_seed_pairs_look_independent(rng):
    l, d = 256, 256
    e = rng.normal(size=d)
    distances = [hamming_distance(biohash(e, SchemeKey("biohashing", 2 * i, "x"), l),
                                  biohash(e, SchemeKey("biohashing", 2 * i + 1, "x"), l))
                 for i in range(100)]
    band = 4 * np.sqrt(l) / 2
    assert min(distances) > 0
    assert all(abs(h - l / 2) <= band for h in distances)
    assert abs(np.mean(distances) - l / 2) < 0.1 * l


def test_iom_random_matches_naive_argmax(rng):
    e = rng.normal(size=12)
    vectors = rng.normal(size=(8, 4, 12))
    got = iom_grp(e, SchemeKey("iom-grp", 0, "x"), m_ints=8, q=4, vectors=vectors)
    naive = []
    for slot in vectors:
        dots = [float(np.dot(v, e)) for v in slot]
        naive.append(dots.index(max(dots)))
    assert got.ints.tolist() == naive
    same = iom_grp(e, SchemeKey("iom-grp", 0, "x"), m_ints=8, q=4, vectors=vectors)
    assert same == got


def test_iom_code_vector():
    assert str(iom_encode(IntegerTemplate([5], 16))) == "0101"


def test_similarity_vectors():
    assert similarity(B("0110"), B("0110"), "sign") == 1.0
    assert similarity(B("0000"), B("0101"), "biohashing") == 0.5
    assert similarity(IntegerTemplate([1, 2, 3, 4], 16), IntegerTemplate([1, 2, 0, 0], 16),
                      Scheme.IOM_GRP) == 0.5


# -- fbp -----------------------------------------------------------------------

def test_pattern_vectors(rng):
    assert [(str(p), c) for p, c in extract_patterns(B("0000"), 3)] == [("000", 2)]
    tie = PatternList(((P("00"), 3), (P("11"), 3)), 2, 8)
    assert top_pattern(tie) == P("00")
    for _ in range(200):
        pl = extract_patterns(BinaryTemplate(rng.integers(0, 2, 40)), 4)
        assert dict(pl)[top_pattern(pl)] == max(pl.counts)


# -- index ---------------------------------------------------------------------

RANKED_A = "0110110001101011011000110110101101001100"   # top 0110, count 9
RANKED_B = "1001000001000100011010000001100010001000"   # top 1000, count 7


def test_index_vectors(rng):
    a, b = B(RANKED_A), B(RANKED_B)
    assert extract_patterns(a, 4).entries[0] == (P("0110"), 9)
    assert extract_patterns(b, 4).entries[0] == (P("1000"), 7)
    rec = EnrolRecord("s", {"a": a, "b": b})
    assert assign_bin(rec, "ranked", 4) == P("0110")
    tops = EnrolRecord("s", {"a": B("101011"), "b": B("011011")})
    assert assign_bin(tops, "xor", 3) == P("110")
    single = EnrolRecord("s", {"a": a})
    for strategy in ("feature", "ranked", "xor"):
        assert assign_bin(single, strategy, 4) == top_pattern(extract_patterns(a, 4))


def test_table_vectors(rng):
    one = build([EnrolRecord("s", {"a": B("0110")})], "ranked", 2)
    assert one.occupancy.sum() == 1 and len(one.bins) == 1
    same = {"a": B("010011"), "b": B("111000")}
    bt = build([EnrolRecord(f"s{i}", same) for i in range(5)], "feature", 3)
    assert list(bt.bins.values()) == [frozenset(f"s{i}" for i in range(5))]
    assert occupancy_stats(bt)[1:] == (5.0, 0.0)
    split = build([EnrolRecord(f"z{i}", {"a": B("0000")}) for i in range(3)]
                  + [EnrolRecord(f"o{i}", {"a": B("1111")}) for i in range(5)], "ranked", 2)
    assert occupancy_stats(split)[1] == 4.0
    recs = [EnrolRecord(f"s{i:03d}", {"a": BinaryTemplate(rng.integers(0, 2, 32))})
            for i in range(200)]
    big = build(recs, "ranked", 5)
    assert set().union(*big.bins.values()) == {r.subject_id for r in recs}
    assert sum(occupancy_stats(big)[0]) == 200


# -- retrieve ------------------------------------------------------------------

CALIB = {"a": NormStats(0.5, 0.1), "b": NormStats(0.5, 0.1), "c": NormStats(0.5, 0.1)}


def test_sequence_vectors(rng):
    z = ProbeSet({"a": B(RANKED_A)})
    expected = extract_patterns(B(RANKED_A), 4).patterns
    for strategy in ("feature", "ranked", "xor"):
        assert probe_sequence(z, strategy, 4) == expected
    assert xor_sequence([np.array([5, 1]), np.array([3])], 3)[0] == 6
    for _ in range(20):
        rec = EnrolRecord("s", {c: BinaryTemplate(rng.integers(0, 2, 30)) for c in "abc"})
        for strategy in ("feature", "ranked", "xor"):
            seq = probe_sequence(ProbeSet(rec.templates), strategy, 3, "abc")
            assert seq[0] == assign_bin(rec, strategy, 3, "abc")


def test_search_vectors(rng):
    same = {c: BinaryTemplate(rng.integers(0, 2, 24)) for c in "abc"}
    recs = [EnrolRecord(f"s{i:02d}", {c: BinaryTemplate(rng.integers(0, 2, 24)) if i else same[c]
                                      for c in "abc"}) for i in range(100)]
    shared = build([EnrolRecord(f"t{i}", same) for i in range(7)], "ranked", 2, "abc",
                   calibration=CALIB)
    res = search(ProbeSet(same), shared, 4)
    assert len(res) == 7 and res.comparisons_performed == 7 * 3
    bt = build(recs, "xor", 2, "abc", calibration=CALIB)
    z = ProbeSet(same)
    first = search(z, bt, 1)
    assert first.ids[0] == "s00"
    assert first.score_of("s00") == max(s for _, s in first.candidates)
    full = exhaustive_search(z, bt)
    assert full.comparisons_performed == 300 and full.ids[0] == "s00"
    covering = search(z, bt, 4)
    if len(covering) == 100:
        assert covering.candidates == full.candidates


def test_zscore_vectors():
    stats = NormStats(0.4, 0.2)
    assert zscore_normalize(0.4, stats) == 0.0
    s = np.linspace(0, 1, 50)
    assert np.all(np.diff(zscore_normalize(s, stats)) > 0)


# -- evalbench -----------------------------------------------------------------

def test_det_endpoints():
    mates = np.array([0.9, 0.8, np.nan, 0.7])
    nonm = np.array([0.2, 0.5, np.nan])
    tau, fpir, fnir = det_curve(mates, nonm)
    above = tau > 0.9
    assert np.all(fpir[above] == 0) and np.all(fnir[above] == 1)
    below = tau < 0.2
    assert np.all(fnir[below] == 0.25)


def test_k_trend_rank_correlation():
    ds = datagen.generate(datagen.SynthSpec())
    reports = Bench(ds, SchemeConfig("biohashing"), Protocol()).k_sweep("feature", range(3, 9))
    rho = spearmanr(range(3, 9), [r.W_u for r in reports]).statistic
    assert rho < 0
    assert all(r.W_l <= r.W_u for r in reports)


def test_k_at_template_length_minus_one():
    ds = datagen.generate(small_spec(n=60, d=9))
    r = Bench(ds, SchemeConfig("sign"), Protocol(folds=2, calibration_identities=10)).closed_set(
        "ranked", 8)
    assert 0 <= r.hit_rate <= 1 and r.W_l <= r.W_u
    assert json.loads(r.to_json())["config"]["k"] == 8


# -- datagen -------------------------------------------------------------------

def cosine_gap(ds, name):
    x = ds.data[name][:100].astype(np.float64)
    x /= np.linalg.norm(x, axis=2, keepdims=True)
    within = np.einsum("sd,sd->s", x[:, 0], x[:, 1]).mean()
    between = np.einsum("sd,td->st", x[:, 0], x[:, 1])
    between = (between.sum() - np.trace(between)) / (100 * 99)
    return within - between


def test_cosine_gap_shrinks_with_sigma():
    sigmas = (0.1, 0.5, 1.0)
    ds = datagen.generate(small_spec(n=100, d=128, sigmas=sigmas))
    gaps = [cosine_gap(ds, name) for name in ("face", "fingerprint", "iris")]
    assert gaps[0] > gaps[1] > gaps[2]


def test_seed_changes_class_means():
    a = datagen.generate(small_spec(n=5, seed=1, sigmas=(0, 0, 0)))
    b = datagen.generate(small_spec(n=5, seed=2, sigmas=(0, 0, 0)))
    assert not np.allclose(a.data["face"], b.data["face"])


def test_csv_row_count_matches_manifest(tmp_path):
    ds = datagen.generate(small_spec(n=7, d=10))
    datagen.store_csv(tmp_path / "d.csv", ds)
    rows = (tmp_path / "d.csv").read_text().splitlines()[1:]
    assert len(rows) == sum(c["count"] for c in ds.manifest()["characteristics"])


# -- cli -----------------------------------------------------------------------

def test_cli_vectors(tmp_path, capsys):
    noiseless = {"synth": {"n_identities": 10, "seed": 1, "characteristics": [
        {"name": c, "dim": 64, "sigma": 0.0} for c in ("face", "iris")]},
        "k": 5, "k_range": [3, 5], "scheme": {"name": "sign"},
        "protocol": {"folds": 2, "calibration_identities": 4}}
    runs = []
    for run in ("a", "b"):
        cfg = tmp_path / f"{run}.json"
        cfg.write_text(json.dumps({**noiseless, "output_dir": str(tmp_path / run)}))
        assert main(["synth", "--config", str(cfg)]) == 0
        assert main(["index", "--config", str(cfg)]) == 0
        runs.append(cfg)
    a, b = tmp_path / "a", tmp_path / "b"
    assert (a / "dataset.csv").read_bytes() == (b / "dataset.csv").read_bytes()
    assert (a / "index.json").read_bytes() == (b / "index.json").read_bytes()
    index = json.loads((a / "index.json").read_text())
    assert len(index["bins"]) <= 10 and sum(map(len, index["bins"].values())) == 6

    assert main(["bench", "--config", str(runs[0]), "--strategy", "exhaustive",
                 "--mode", "closed"]) == 0
    row = (a / "report.csv").read_text().splitlines()
    header, values = row[0].split(","), row[1].split(",")
    assert f"{float(values[header.index('W_u_pct')]):.2f}" == "100.00"

    assert main(["sweep", "--config", str(runs[0])]) == 0
    sweep_rows = (a / "sweep.csv").read_text().splitlines()[1:]
    assert len(sweep_rows) == 3
    reports = json.loads((a / "sweep.json").read_text())["reports"]
    header = (a / "sweep.csv").read_text().splitlines()[0].split(",")
    for line, rep in zip(sweep_rows, reports):
        cells = dict(zip(header, line.split(",")))
        assert float(cells["W_u_pct"]) == 100 * rep["W_u"]
        assert float(cells["hit_rate_pct"]) == 100 * rep["hit_rate"]
        assert float(cells["comp"]) == rep["mean_comparisons"]

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"synth": {"characteristics": [{"name": "x", "sigma": -1}]}}))
    assert main(["synth", "--config", str(bad)]) != 0
