"""Compare the four self-training strategies on the synthetic benchmark.

Each seed builds a fresh corpus and weak scorer; every strategy starts from
the same scorer state, so differences come from the labels they train on.
Writes comparison.csv next to this script.
"""

from pathlib import Path

from sple import StrategyConfig, compare_strategies, make_benchmark
from sple.benchmark import DEFAULT_BENCHMARK
from sple.selftrain import STRATEGIES

N_SEEDS = 5  # bump to 10 for the full picture

cfg = StrategyConfig(seed=0)
table = compare_strategies(
    cfg, STRATEGIES, N_SEEDS, lambda seed: make_benchmark(DEFAULT_BENCHMARK, seed), n_workers=2
)

out = Path(__file__).with_name("comparison.csv")
table.to_csv(out)
print(f"wrote {out}\n")

print(f"{'strategy':13s} {'eval mean':>9s} {'min':>7s} {'max':>7s} {'pseudo-label':>13s}")
for strat, row in table.summarize().items():
    print(
        f"{strat:13s} {row['eval_mean']:9.4f} {row['eval_min']:7.4f} "
        f"{row['eval_max']:7.4f} {row['pl_mean']:13.4f}"
    )

print("\nper-run detail (strategy, seed, eval acc, raw acc, edited acc):")
for r in table.reports:
    print(
        f"  {r.strategy:13s} seed={r.seed} eval={r.final_eval_accuracy:.4f} "
        f"raw={r.pseudo_label_accuracy_raw:.4f} edited={r.pseudo_label_accuracy_edited:.4f} "
        f"removed={r.removed_count} fallbacks={r.fallback_count}"
    )
