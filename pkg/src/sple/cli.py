"""Command-line front end.

Subcommands: synth, label, edit, selftrain, compare, export. Exit codes:
0 success, 2 configuration error, 3 data/format error, 4 numerical error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from . import benchmark
from .data import (
    SyntheticSpec,
    generate_synthetic_corpus,
    load_corpus,
    load_records,
    select_unlabeled,
    write_corpus,
    write_records,
)
from .editing import edit_labels, filter_uncertain
from .ensemble import EnsembleConfig, augmented_label
from .errors import (
    ConfigurationError,
    DataFormatError,
    DataIntegrityError,
    NumericalError,
    SpleError,
)
from .scorer import ReferenceClassifier
from .selftrain import STRATEGIES, StrategyConfig, compare_strategies, run_strategy
from .uncertainty import uncertainty_scores

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _add_shared_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--passes", type=int, default=7, help="dropout passes per sample")
    p.add_argument("--neighbors", type=int, default=9, help="k for the uncertainty graph")
    p.add_argument("--dropout", type=float, default=0.1, help="dropout rate")
    p.add_argument("--remove-frac", type=float, default=0.2, help="uncertain fraction to remove")
    p.add_argument("--epochs", type=int, default=6, help="self-training epochs")
    p.add_argument("--lr", type=float, default=0.5, help="self-training learning rate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--loo-priors", action="store_true", help="leave-one-out label priors")
    p.add_argument("--rank-renormalized", action="store_true",
                   help="rank multi-class suppositions by neutral-free True probability")
    p.add_argument("--mc-target", choices=("predicted", "entail"), default="predicted")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sple", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus file")
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--per-class", type=int, default=500)
    p.add_argument("--separation", type=float, default=1.2)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("label", help="run dropout passes over a corpus, write records")
    _add_shared_flags(p)
    p.add_argument("--corpus", required=True)
    p.add_argument("--scorer", help="classifier checkpoint; omit for a fresh seeded one")
    p.add_argument("--hidden", type=int, default=32, help="hidden width for a fresh classifier")
    p.add_argument("--pool", type=int, default=0, help="label only a random pool of this size")
    p.add_argument("--format", choices=("jsonl", "binary"), default="jsonl")
    p.add_argument("--out", required=True)

    p = sub.add_parser("edit", help="filter uncertain records and revote labels")
    _add_shared_flags(p)
    p.add_argument("--records", required=True)
    p.add_argument("--corpus", help="corpus file, needed for scorer-based fallback")
    p.add_argument("--scorer", help="classifier checkpoint for fallback relabeling")
    p.add_argument("--fallback-records", help="single-pass no-dropout record file for fallback")
    p.add_argument("--report-out", help="also write the uncertainty report CSV here")
    p.add_argument("--out", required=True)

    p = sub.add_parser("selftrain", help="run one strategy end to end on a corpus")
    _add_shared_flags(p)
    p.add_argument("--strategy", choices=STRATEGIES, default="simple")
    p.add_argument("--corpus", help="corpus file; omit for the synthetic benchmark")
    p.add_argument("--scorer", help="pretrained checkpoint; omit to pretrain a weak one")
    p.add_argument("--pool", type=int, default=400)
    p.add_argument("--save-scorer", help="write the fine-tuned checkpoint here")
    p.add_argument("--out", help="write the run report JSON here")

    p = sub.add_parser("compare", help="sweep strategies x seeds on the synthetic benchmark")
    _add_shared_flags(p)
    p.add_argument("--strategies", nargs="+", choices=STRATEGIES, default=list(STRATEGIES))
    p.add_argument("--seeds", type=int, default=10, help="number of benchmark seeds")
    p.add_argument("--pool", type=int, default=400)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--biased", action="store_true", help="use the skewed-scorer benchmark")
    p.add_argument("--out", default="comparison.csv")

    p = sub.add_parser("export", help="dump embeddings, labels, and s-scores as CSV")
    _add_shared_flags(p)
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)

    return parser


def _strategy_config(args, task_kind: str = "binary", pool: int | None = None) -> StrategyConfig:
    return StrategyConfig(
        strategy=getattr(args, "strategy", "simple"),
        n_passes=args.passes,
        k_neighbors=args.neighbors,
        dropout_rate=args.dropout,
        remove_fraction=args.remove_frac,
        epochs=args.epochs,
        learning_rate=args.lr,
        seed=args.seed,
        task_kind=task_kind,
        pool_size=pool if pool is not None else getattr(args, "pool", 400),
        mc_target=args.mc_target,
        rank_renormalize=args.rank_renormalized,
        loo_priors=args.loo_priors,
    )


def cmd_synth(args) -> int:
    spec = SyntheticSpec(
        n_classes=args.classes,
        dimension=args.dim,
        samples_per_class=args.per_class,
        separation=args.separation,
        noise_sigma=args.sigma,
        seed=args.seed,
    )
    write_corpus(generate_synthetic_corpus(spec), args.out)
    print(f"wrote corpus of {args.classes * args.per_class} samples to {args.out}")
    return 0


def _load_scorer(args, corpus):
    if args.scorer:
        return ReferenceClassifier.load(args.scorer, dropout_rate=args.dropout)
    return ReferenceClassifier(
        corpus.dimension,
        hidden=getattr(args, "hidden", 32),
        n_classes=corpus.n_classes,
        dropout_rate=args.dropout,
        seed=args.seed,
    )


def cmd_label(args) -> int:
    corpus = load_corpus(args.corpus)
    scorer = _load_scorer(args, corpus)
    samples = list(corpus.samples)
    if args.pool:
        samples, _ = select_unlabeled(corpus, args.pool, args.seed)
    cfg = EnsembleConfig(args.passes, args.dropout, args.seed, args.rank_renormalized)
    records = augmented_label(scorer, samples, cfg, corpus.task_kind)
    write_records(records, args.out, format=args.format)
    print(f"wrote {len(records)} records ({records.m} samples x {records.n_passes} passes) to {args.out}")
    return 0


def cmd_edit(args) -> int:
    records = load_records(args.records)
    report = uncertainty_scores(records, args.neighbors, loo_priors=args.loo_priors)
    if args.report_out:
        report.to_csv(args.report_out)
    scorer = None
    pool = None
    fallback = None
    if args.fallback_records:
        det = load_records(args.fallback_records)
        if det.n_passes != 1:
            raise DataIntegrityError("fallback record file must hold exactly one pass per sample")
        fallback = {int(s): int(l) for s, l in zip(det.sample_ids, det.labels)}
    elif args.scorer and args.corpus:
        corpus = load_corpus(args.corpus)
        scorer = ReferenceClassifier.load(args.scorer, dropout_rate=args.dropout)
        pool = list(corpus.samples)
    task_kind = "binary"
    edited = edit_labels(
        records,
        report,
        args.remove_frac,
        scorer=scorer,
        pool=pool,
        task_kind=task_kind,
        fallback_labels=fallback,
    )
    edited.to_csv(args.out)
    print(
        f"edited {len(edited)} labels ({edited.fallback_count} fallbacks, "
        f"{len(records) - len(filter_uncertain(report, args.remove_frac))} records removed) -> {args.out}"
    )
    return 0


def cmd_selftrain(args) -> int:
    if args.corpus:
        corpus = load_corpus(args.corpus)
        scorer = _load_scorer(args, corpus)
        if not args.scorer:
            # No checkpoint: pretrain a weak scorer on a small gold split and
            # keep that split out of the self-training corpus.
            import numpy as np

            labeled = [s for s in corpus.samples if s.gold_label is not None]
            n_seed = min(40, len(labeled) // 2)
            if n_seed == 0:
                raise ConfigurationError(
                    "corpus has no gold labels; pass --scorer with a pretrained checkpoint"
                )
            rng = np.random.default_rng([args.seed, 0xBE])
            picked = {labeled[i].sample_id for i in rng.permutation(len(labeled))[:n_seed]}
            scorer.fit(
                [(s, s.gold_label) for s in corpus.samples if s.sample_id in picked],
                0.3,
                12,
            )
            corpus = dataclasses.replace(
                corpus,
                samples=tuple(s for s in corpus.samples if s.sample_id not in picked),
            )
    else:
        corpus, scorer = benchmark.make_benchmark(benchmark.DEFAULT_BENCHMARK, args.seed)
    cfg = _strategy_config(args, task_kind=corpus.task_kind)
    report = run_strategy(cfg, corpus, scorer)
    payload = dataclasses.asdict(report)
    print(json.dumps(payload, indent=2, default=float))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, default=float)
    if args.save_scorer:
        clone = scorer.clone()
        pool, _ = select_unlabeled(corpus, cfg.pool_size, cfg.seed)
        by_id = {s.sample_id: s for s in pool}
        pairs = [(by_id[sid], lab) for sid, lab in report.final_labels if sid in by_id]
        clone.fit(pairs, cfg.learning_rate, cfg.epochs, batch_size=cfg.batch_size)
        clone.save(args.save_scorer)
    return 0


def cmd_compare(args) -> int:
    spec = benchmark.BIASED_BENCHMARK if args.biased else benchmark.DEFAULT_BENCHMARK

    def make_run(seed: int):
        return benchmark.make_benchmark(spec, seed)

    cfg = _strategy_config(args)
    table = compare_strategies(cfg, args.strategies, args.seeds, make_run, n_workers=args.workers)
    table.to_csv(args.out)
    summary = table.summarize()
    for strat, row in summary.items():
        print(
            f"{strat:13s} eval mean={row['eval_mean']:.4f} "
            f"min={row['eval_min']:.4f} max={row['eval_max']:.4f} pl={row['pl_mean']:.4f}"
        )
    print(f"wrote {args.out}")
    return 0


def cmd_export(args) -> int:
    records = load_records(args.records)
    report = uncertainty_scores(records, args.neighbors, loo_priors=args.loo_priors)
    with open(args.out, "w", encoding="utf-8") as fh:
        dims = ",".join(f"e{i}" for i in range(records.e_dim))
        fh.write(f"sample_id,pass,label,s,{dims}\n")
        for i in range(len(records)):
            emb = ",".join(repr(float(v)) for v in records.embeddings[i])
            fh.write(
                f"{records.sample_ids[i]},{records.passes[i]},{records.labels[i]},"
                f"{float(report.s[i])!r},{emb}\n"
            )
    print(f"wrote {len(records)} rows to {args.out}")
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "label": cmd_label,
    "edit": cmd_edit,
    "selftrain": cmd_selftrain,
    "compare": cmd_compare,
    "export": cmd_export,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataFormatError, DataIntegrityError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SpleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
