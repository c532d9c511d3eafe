"""Workload and hit rate as the pattern length grows, then the open set.

Runs the 10-fold closed-set protocol for k = 3..8 on the default synthetic
profile (1000 identities, three characteristics), then an open-set run at
the best k. Takes about half a minute.
"""

from fbpindex import Bench, Protocol, SchemeConfig, SynthSpec, generate
from fbpindex.evalbench import select_best_k

ds = generate(SynthSpec())
bench = Bench(ds, SchemeConfig("biohashing"), Protocol())

print("strategy  k   W_u%    W_l%   bins   H-R%")
for strategy in ("feature", "ranked", "xor"):
    reports = bench.k_sweep(strategy, range(3, 9))
    for r in reports:
        print(f"{strategy:8s} {r.config['k']:2d} {100 * r.W_u:6.2f} {100 * r.W_l:7.2f} "
              f"{r.mean_bins_visited:6.2f} {100 * r.hit_rate:6.2f}")
    best = select_best_k(reports)
    print(f"{strategy:8s} best k={best.config['k']}\n")

open_run = bench.open_set("ranked", 6)
print(f"open set, ranked k=6: visiting t={open_run.t} bins costs "
      f"{100 * open_run.W_open:.2f}% of a full scan")
for target, fnir in open_run.fnir_at_fpir.items():
    print(f"  FNIR at FPIR={target}: {100 * fnir:.2f}%")
