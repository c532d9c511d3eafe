"""Command-line entry point: ``fbpindex {synth,protect,index,search,bench,sweep}``.

Every subcommand reads an optional JSON run configuration (``--config``);
flags override configuration keys.  Exit codes: 0 success, 2 configuration
error, 3 data error, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import config as runconfig
from . import datagen
from .errors import (ConfigurationError, DataFormatError, DimensionError, EnrollmentError,
                     ProtocolError)
from .evalbench import Bench, det_to_csv, reports_to_csv, select_best_k
from .index import BinTable, atomic_write_text, build_from_batches, occupancy_stats
from .protect import Protector, Scheme, SchemeKey
from .retrieve import ProbeSet, exhaustive_search, search

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--dataset", help="dataset CSV or binary-container manifest")
    common.add_argument("--output-dir", dest="output_dir")
    common.add_argument("--strategy", choices=["feature", "ranked", "xor", "exhaustive"])
    common.add_argument("--k", type=int)
    common.add_argument("--k-range", dest="k_range", type=int, nargs=2, metavar=("LO", "HI"))
    common.add_argument("--scheme", help="sign | biohashing | iom-grp")
    common.add_argument("--scheme-seed", dest="scheme_seed", type=int)
    common.add_argument("--seed", type=int, help="protocol seed")
    common.add_argument("--folds", type=int)
    common.add_argument("--mode", choices=["closed", "open", "both"])
    common.add_argument("--t", dest="t_policy", type=int, help="fixed number of bins to visit")
    common.add_argument("--characteristics", help="comma-separated, in fusion order")

    parser = argparse.ArgumentParser(
        prog="fbpindex", description="Frequent-pattern indexing of protected biometric templates.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("synth", parents=[common], help="generate a synthetic dataset")
    p.add_argument("--binary", action="store_true", help="also write the float32 container")
    sub.add_parser("protect", parents=[common], help="write protected templates (JSON lines)")
    sub.add_parser("index", parents=[common], help="build and save a bin table")
    p = sub.add_parser("search", parents=[common], help="search one probe against an index")
    p.add_argument("--index", required=True, help="bin table written by 'index'")
    p.add_argument("--subject", required=True)
    p.add_argument("--sample", type=int, default=1)
    p.add_argument("--visit", type=int, help="bins to visit (default: all 2**k)")
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--top", type=int, default=10)
    sub.add_parser("bench", parents=[common], help="closed/open-set benchmark")
    sub.add_parser("sweep", parents=[common], help="closed-set sweep over k")
    return parser


def _config(args) -> runconfig.RunConfig:
    raw = runconfig.load(args.config) if args.config else {}
    for key in ("dataset", "output_dir", "strategy", "k", "mode", "t_policy"):
        value = getattr(args, key, None)
        if value is not None:
            raw[key] = value
    if args.k_range is not None:
        raw["k_range"] = list(args.k_range)
    if args.characteristics:
        raw["characteristics"] = [c for c in args.characteristics.split(",") if c]
    if args.scheme is not None:
        raw.setdefault("scheme", {})["name"] = args.scheme
    if args.scheme_seed is not None:
        raw.setdefault("scheme", {})["seed"] = args.scheme_seed
    if args.seed is not None:
        raw.setdefault("protocol", {})["seed"] = args.seed
    if args.folds is not None:
        raw.setdefault("protocol", {})["folds"] = args.folds
    return runconfig.validate(raw)


def _dataset(cfg: runconfig.RunConfig) -> datagen.EmbeddingDataset:
    ds = datagen.load(cfg.dataset) if cfg.dataset else datagen.generate(cfg.synth)
    if cfg.characteristics:
        ds = ds.subset(cfg.characteristics)
    return ds


def _write(path: Path, text: str) -> None:
    atomic_write_text(path, text)
    print(f"wrote {path}")


def cmd_synth(cfg, args) -> int:
    spec = cfg.synth
    spec.validate(k_max=max(cfg.k_range[-1], cfg.k))
    ds = datagen.generate(spec)
    out = cfg.output_dir
    datagen.store_csv(out / "dataset.csv", ds)
    print(f"wrote {out / 'dataset.csv'}")
    if args.binary:
        datagen.store_binary(out / "dataset", ds)
        print(f"wrote {out / 'dataset.json'} and {out / 'dataset.bin'}")
    _write(out / "synth_spec.json", json.dumps(spec.to_dict(), indent=1, sort_keys=True) + "\n")
    for entry in ds.manifest()["characteristics"]:
        print(f"{entry['name']}: {ds.n_subjects} identities x {entry['samples']} samples, "
              f"d={entry['dim']}")
    return EXIT_OK


def cmd_protect(cfg, args) -> int:
    ds = _dataset(cfg)
    lines = []
    for c in ds.characteristics:
        protector = cfg.scheme.protector(c)
        arr = ds.data[c]
        s, ns, d = arr.shape
        batch = protector.protect(arr.reshape(s * ns, d))
        for row in range(s * ns):
            rec = {"subject_id": ds.subject_ids[row // ns], "characteristic": c,
                   "sample_id": row % ns, "scheme": batch.scheme.value, "n": batch.n_bits,
                   "hex": np.packbits(batch.bits[row]).tobytes().hex()}
            if batch.ints is not None:
                rec["q"] = batch.q
                rec["ints"] = batch.ints[row].tolist()
            lines.append(json.dumps(rec, sort_keys=True))
    _write(cfg.output_dir / "protected.jsonl", "\n".join(lines) + "\n")
    return EXIT_OK


def _enrolment_table(cfg, ds) -> BinTable:
    bench = Bench(ds, cfg.scheme, cfg.protocol, cfg.characteristics)
    if cfg.strategy == "exhaustive":
        raise ConfigurationError("an index needs a fusion strategy, not 'exhaustive'")
    calib = set(bench.calibration_subjects.tolist())
    enrolled = np.array([i for i in range(ds.n_subjects) if i not in calib], dtype=np.int64)
    batches = {c: bench._rows(c, enrolled, np.zeros(enrolled.size, dtype=np.int64))
               for c in bench.characteristics}
    schemes = {c: cfg.scheme.protector(c).describe() for c in bench.characteristics}
    return build_from_batches(bench.subject_ids(enrolled), batches, cfg.strategy, cfg.k,
                              bench.characteristics, schemes, bench.calibration)


def cmd_index(cfg, args) -> int:
    ds = _dataset(cfg)
    bt = _enrolment_table(cfg, ds)
    sizes, mean, std = occupancy_stats(bt)
    if sum(sizes) != bt.n_subjects:
        raise AssertionError("bin occupancies do not sum to the number of enrolled subjects")
    bt.save(cfg.output_dir / "index.json")
    print(f"wrote {cfg.output_dir / 'index.json'}")
    print(f"strategy={bt.strategy.value} k={bt.k} m={bt.m} subjects={bt.n_subjects} "
          f"bins_used={len(sizes)}/{1 << bt.k} mean_occupancy={mean:.3f} std_occupancy={std:.3f}")
    return EXIT_OK


def cmd_search(cfg, args) -> int:
    bt = BinTable.load(args.index)
    ds = _dataset(cfg).subset(bt.characteristic_order)
    if args.subject not in ds.subject_ids:
        raise DataFormatError(f"subject {args.subject!r} not in dataset")
    row = ds.subject_ids.index(args.subject)
    templates, integers = {}, {}
    for c in bt.characteristic_order:
        desc = bt.schemes[c]
        protector = Protector(SchemeKey(desc["scheme"], desc["seed"], c),
                              desc.get("length", 512), desc.get("m_ints", 512), desc.get("q", 16))
        samples = ds.data[c][row]
        if not 0 <= args.sample < samples.shape[0]:
            raise DataFormatError(f"{c}: sample {args.sample} out of range")
        batch = protector.protect(samples[args.sample])
        templates[c] = batch.binary(0)
        if batch.scheme is Scheme.IOM_GRP:
            integers[c] = batch.scored(0)
    probe = ProbeSet(templates, integers)
    if args.exhaustive:
        result = exhaustive_search(probe, bt)
    else:
        result = search(probe, bt, args.visit or (1 << bt.k))
    out = {"subject_id": args.subject, "sample": args.sample,
           "comparisons_performed": result.comparisons_performed,
           "bins_visited": result.bins_visited,
           "workload": result.comparisons_performed / (bt.n_subjects * bt.m),
           "candidates": [[sid, score] for sid, score in result.candidates[:args.top]]}
    print(json.dumps(out, indent=1))
    return EXIT_OK


def _summary(r) -> str:
    c = r.config
    head = f"[{c['mode']}] {'-'.join(c['characteristics'])} {c['scheme']} {c['strategy']} k={c['k']}"
    if c["mode"] == "closed":
        return (f"{head} W_u={100 * r.W_u:.2f}% W_l={100 * r.W_l:.2f}% "
                f"H-R={100 * r.hit_rate:.2f}%")
    fnir = " ".join(f"FNIR@FPIR={t}:{100 * v:.2f}%" for t, v in sorted(r.fnir_at_fpir.items()))
    return f"{head} t={r.t} W={100 * r.W_open:.2f}% {fnir}"


def cmd_bench(cfg, args) -> int:
    ds = _dataset(cfg)
    bench = Bench(ds, cfg.scheme, cfg.protocol, cfg.characteristics)
    k = None if cfg.strategy == "exhaustive" else cfg.k
    reports = []
    if cfg.mode in ("closed", "both"):
        reports.append(bench.closed_set(cfg.strategy, k))
    if cfg.mode in ("open", "both"):
        reports.append(bench.open_set(cfg.strategy, k))
    out = cfg.output_dir
    _write(out / "report.csv", reports_to_csv(reports))
    _write(out / "report.json", json.dumps({"schema_version": 1, "reports":
                                            [json.loads(r.to_json()) for r in reports]},
                                           indent=1, sort_keys=True) + "\n")
    if any(r.det for r in reports):
        _write(out / "det.csv", det_to_csv([r for r in reports if r.det]))
    for r in reports:
        print(_summary(r))
    return EXIT_OK


def cmd_sweep(cfg, args) -> int:
    ds = _dataset(cfg)
    if cfg.strategy == "exhaustive":
        raise ConfigurationError("a k sweep needs a fusion strategy")
    bench = Bench(ds, cfg.scheme, cfg.protocol, cfg.characteristics)
    reports = bench.k_sweep(cfg.strategy, cfg.k_range)
    out = cfg.output_dir
    _write(out / "sweep.csv", reports_to_csv(reports))
    _write(out / "sweep.json", json.dumps({"schema_version": 1, "reports":
                                           [json.loads(r.to_json()) for r in reports]},
                                          indent=1, sort_keys=True) + "\n")
    for r in reports:
        print(_summary(r))
    best = select_best_k(reports)
    print(f"best k={best.config['k']} (W_u={100 * best.W_u:.2f}%, H-R={100 * best.hit_rate:.2f}%)")
    return EXIT_OK


COMMANDS = {"synth": cmd_synth, "protect": cmd_protect, "index": cmd_index,
            "search": cmd_search, "bench": cmd_bench, "sweep": cmd_sweep}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _config(args)
        return COMMANDS[args.command](cfg, args)
    except (ConfigurationError, DimensionError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataFormatError, EnrollmentError, ProtocolError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except AssertionError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
