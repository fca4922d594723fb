"""End-to-end self-training runs and strategy comparisons.

Four strategies share one skeleton (pseudo-label the pool, train, evaluate):

* ``baseline_st``: one dropout-free pass per sample, train on all labels.
* ``dropout_vote``: N dropout passes, per-sample plurality vote, dropout-free
  relabel on ties, no uncertainty filter.
* ``setred``: one dropout-free pass per sample, cut-edge uncertainty over
  those M records, drop the most uncertain samples, train on the rest.
* ``simple``: N dropout passes, cut-edge uncertainty over all M*N records,
  drop the most uncertain records, vote the survivors, dropout-free relabel
  for empty or tied votes, train on all M samples.

Labels are produced once per run; the epochs that follow fine-tune on that
fixed label set.
"""

from __future__ import annotations

import dataclasses
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import EnsembleRecord, EnsembleRecordSet, LabeledCorpus, select_unlabeled
from .editing import EditedLabel, EditedLabelSet, filter_uncertain, majority_vote
from .ensemble import EnsembleConfig, augmented_label, deterministic_label
from .errors import ConfigurationError, DataIntegrityError
from .scorer import ClassScores, ScorerContract, max_confidence_target
from .uncertainty import uncertainty_scores

STRATEGIES = ("baseline_st", "dropout_vote", "setred", "simple")


@dataclass(frozen=True)
class StrategyConfig:
    """Knobs for one self-training run."""

    strategy: str = "simple"
    n_passes: int = 7
    k_neighbors: int = 9
    dropout_rate: float = 0.1
    remove_fraction: float = 0.2
    epochs: int = 6
    learning_rate: float = 0.5
    batch_size: int | None = 32
    seed: int = 0
    task_kind: str = "binary"
    pool_size: int = 400
    mc_target: str = "predicted"  # "predicted" | "entail"
    rank_renormalize: bool = False
    loo_priors: bool = False

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigurationError(f"unknown strategy {self.strategy!r}")
        if self.n_passes < 1:
            raise ConfigurationError("n_passes must be >= 1")
        if self.k_neighbors < 1:
            raise ConfigurationError("k_neighbors must be >= 1")
        if not (0.0 <= self.dropout_rate < 1.0):
            raise ConfigurationError("dropout_rate must lie in [0, 1)")
        if not (0.0 <= self.remove_fraction <= 1.0):
            raise ConfigurationError("remove_fraction must lie in [0, 1]")
        if self.epochs < 1:
            raise ConfigurationError("epochs must be >= 1")
        if self.mc_target not in ("predicted", "entail"):
            raise ConfigurationError(f"unknown mc_target policy {self.mc_target!r}")


@dataclass(frozen=True)
class RunReport:
    """Measured outcomes of one strategy run."""

    strategy: str
    seed: int
    pseudo_label_accuracy_raw: float
    pseudo_label_accuracy_edited: float
    label_histogram_before: tuple[int, ...]
    label_histogram_after: tuple[int, ...]
    majority_share_before: float
    majority_share_after: float
    eval_accuracy: tuple[float, ...]
    fallback_count: int
    removed_count: int
    trained_count: int
    final_labels: tuple[tuple[int, int], ...]  # (sample_id, label), id-ordered
    wall_time: float

    @property
    def final_eval_accuracy(self) -> float:
        return self.eval_accuracy[-1] if self.eval_accuracy else float("nan")


def pseudo_label_accuracy(edited: EditedLabelSet, gold: dict[int, int]) -> float:
    """Fraction of edited labels matching the gold labels."""
    hits = 0
    for entry in edited:
        if entry.sample_id not in gold:
            raise DataIntegrityError(f"no gold label for sample {entry.sample_id}")
        hits += int(entry.final_label == gold[entry.sample_id])
    return hits / len(edited)


def label_distribution(labels, n_classes: int | None = None):
    """Per-label counts and the largest label share."""
    labels = np.asarray(list(labels), dtype=np.int64)
    if labels.size == 0:
        return np.zeros(n_classes or 0, dtype=np.int64), float("nan")
    width = n_classes if n_classes is not None else int(labels.max()) + 1
    hist = np.bincount(labels, minlength=width)
    return hist, float(hist.max() / labels.size)


def _vote_with_fallback(
    record_set: EnsembleRecordSet,
    retained_keys,
    scorer: ScorerContract,
    pool,
    task_kind: str,
) -> EditedLabelSet:
    """Plurality vote over retained records with dropout-free relabeling."""
    votes: dict[int, list[int]] = {int(s): [] for s in record_set.unique_sample_ids()}
    for i in range(len(record_set)):
        key = (int(record_set.sample_ids[i]), int(record_set.passes[i]))
        if key in retained_keys:
            votes[key[0]].append(int(record_set.labels[i]))
    by_id = {s.sample_id: s for s in pool}
    entries = []
    for sid, labs in votes.items():
        outcome = majority_vote(labs)
        if outcome.kind == "decided":
            entries.append(EditedLabel(sid, outcome.label, "vote", len(labs)))
        else:
            label, _, _ = deterministic_label(scorer, by_id[sid], task_kind)
            entries.append(EditedLabel(sid, label, "fallback", len(labs)))
    return EditedLabelSet(entries)


def _deterministic_record_set(scorer, pool, task_kind) -> EnsembleRecordSet:
    records = []
    for s in pool:
        label, scores, emb = deterministic_label(scorer, s, task_kind)
        records.append(EnsembleRecord(s.sample_id, 0, label, scores, emb))
    return EnsembleRecordSet.from_records(records, 1)


def _training_pairs(scorer, samples_by_id, final_labels, task_kind, mc_target):
    """Map final labels onto fit targets.

    Classifier-style scorers train directly on the final label. Entailment
    scorers on multi-class tasks train only the final label's supposition,
    paired with its predicted truth value (or a hard "entail" target).
    """
    pairs = []
    if scorer.scores_kind == "entailment" and task_kind == "multiclass":
        for sid, label in final_labels.items():
            sample = samples_by_id[sid]
            if mc_target == "entail":
                pairs.append((sample, (label, "entail")))
            else:
                triples = [
                    ClassScores.from_array(row)
                    for row in np.asarray(scorer.score(sample, stochastic=False))
                ]
                pairs.append((sample, max_confidence_target(triples, label)))
    else:
        for sid, label in final_labels.items():
            pairs.append((samples_by_id[sid], label))
    return pairs


def _eval_accuracy(scorer, eval_samples, task_kind) -> float:
    if not eval_samples:
        return float("nan")
    hits = 0
    for s in eval_samples:
        label, _, _ = deterministic_label(scorer, s, task_kind)
        hits += int(label == s.gold_label)
    return hits / len(eval_samples)


def run_strategy(
    cfg: StrategyConfig, corpus: LabeledCorpus, scorer: ScorerContract
) -> RunReport:
    """Run one self-training strategy end to end.

    The scorer argument is never mutated; training happens on a clone, so one
    pretrained scorer can be shared across strategy runs for paired
    comparisons.
    """
    t0 = time.perf_counter()
    pool, eval_samples = select_unlabeled(corpus, cfg.pool_size, cfg.seed)
    gold = corpus.gold_map()
    clf = scorer.clone()
    samples_by_id = {s.sample_id: s for s in pool}

    raw_set = _deterministic_record_set(clf, pool, cfg.task_kind)
    raw_labels = {int(sid): int(lab) for sid, lab in zip(raw_set.sample_ids, raw_set.labels)}
    m = len(pool)

    fallback_count = 0
    removed_count = 0
    if cfg.strategy == "baseline_st":
        final_labels = dict(raw_labels)
        after_labels = list(final_labels.values())
    elif cfg.strategy in ("dropout_vote", "simple"):
        fraction = cfg.remove_fraction if cfg.strategy == "simple" else 0.0
        ens_cfg = EnsembleConfig(
            cfg.n_passes, cfg.dropout_rate, cfg.seed, cfg.rank_renormalize
        )
        records = augmented_label(clf, pool, ens_cfg, cfg.task_kind)
        if fraction > 0.0:
            report = uncertainty_scores(records, cfg.k_neighbors, loo_priors=cfg.loo_priors)
            retained = filter_uncertain(report, fraction)
            removed_count = len(records) - len(retained)
        else:
            retained = {
                (int(s), int(p)) for s, p in zip(records.sample_ids, records.passes)
            }
        edited = _vote_with_fallback(records, retained, clf, pool, cfg.task_kind)
        fallback_count = edited.fallback_count
        final_labels = edited.labels()
        after_labels = list(final_labels.values())
    elif cfg.strategy == "setred":
        report = uncertainty_scores(raw_set, cfg.k_neighbors, loo_priors=cfg.loo_priors)
        retained = filter_uncertain(report, cfg.remove_fraction)
        survivor_ids = sorted(sid for sid, _ in retained)
        removed_count = m - len(survivor_ids)
        final_labels = {sid: raw_labels[sid] for sid in survivor_ids}
        after_labels = list(final_labels.values())
    else:  # pragma: no cover - guarded by StrategyConfig
        raise ConfigurationError(f"unknown strategy {cfg.strategy!r}")

    n_classes = corpus.n_classes
    hist_before, share_before = label_distribution(raw_labels.values(), n_classes)
    hist_after, share_after = label_distribution(after_labels, n_classes)

    acc_raw = np.mean([raw_labels[sid] == gold[sid] for sid in raw_labels])
    acc_edited = np.mean([lab == gold[sid] for sid, lab in final_labels.items()])

    pairs = _training_pairs(clf, samples_by_id, final_labels, cfg.task_kind, cfg.mc_target)
    eval_curve = []
    for _ in range(cfg.epochs):
        clf.fit(pairs, cfg.learning_rate, 1, batch_size=cfg.batch_size)
        eval_curve.append(_eval_accuracy(clf, eval_samples, cfg.task_kind))

    return RunReport(
        strategy=cfg.strategy,
        seed=cfg.seed,
        pseudo_label_accuracy_raw=float(acc_raw),
        pseudo_label_accuracy_edited=float(acc_edited),
        label_histogram_before=tuple(int(c) for c in hist_before),
        label_histogram_after=tuple(int(c) for c in hist_after),
        majority_share_before=share_before,
        majority_share_after=share_after,
        eval_accuracy=tuple(eval_curve),
        fallback_count=fallback_count,
        removed_count=removed_count,
        trained_count=len(final_labels),
        final_labels=tuple(sorted(final_labels.items())),
        wall_time=time.perf_counter() - t0,
    )


CSV_COLUMNS = (
    "strategy,seed,eval_acc,pl_acc_raw,pl_acc_edited,"
    "majority_share_before,majority_share_after,removed,fallbacks"
)


class ComparisonTable:
    """Per-(strategy, seed) outcomes of a strategy sweep."""

    def __init__(self, reports: list[RunReport]):
        order = {name: i for i, name in enumerate(STRATEGIES)}
        self.reports = sorted(reports, key=lambda r: (order[r.strategy], r.seed))

    def summarize(self) -> dict[str, dict[str, float]]:
        out = {}
        for strat in STRATEGIES:
            accs = [r.final_eval_accuracy for r in self.reports if r.strategy == strat]
            pl = [r.pseudo_label_accuracy_edited for r in self.reports if r.strategy == strat]
            if not accs:
                continue
            out[strat] = {
                "eval_mean": float(np.mean(accs)),
                "eval_min": float(np.min(accs)),
                "eval_max": float(np.max(accs)),
                "pl_mean": float(np.mean(pl)),
            }
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(CSV_COLUMNS + "\n")
            for r in self.reports:
                fh.write(
                    f"{r.strategy},{r.seed},{float(r.final_eval_accuracy)!r},"
                    f"{float(r.pseudo_label_accuracy_raw)!r},"
                    f"{float(r.pseudo_label_accuracy_edited)!r},"
                    f"{float(r.majority_share_before)!r},"
                    f"{float(r.majority_share_after)!r},"
                    f"{r.removed_count},{r.fallback_count}\n"
                )


def compare_strategies(
    base_cfg: StrategyConfig,
    strategies,
    n_seeds: int,
    make_run,
    n_workers: int = 1,
) -> ComparisonTable:
    """Run every (strategy, seed) cell and collect a comparison table.

    ``make_run(seed)`` must return a (corpus, scorer) pair; it is called once
    per seed and the scorer is shared (cloned) across that seed's strategies.
    Worker count affects scheduling only, never results.
    """
    strategies = list(strategies)
    if not strategies:
        raise ConfigurationError("no strategies requested")
    for s in strategies:
        if s not in STRATEGIES:
            raise ConfigurationError(f"unknown strategy {s!r}")
    seeds = [base_cfg.seed + t for t in range(n_seeds)]

    def run_seed(seed: int) -> list[RunReport]:
        corpus, scorer = make_run(seed)
        out = []
        for strat in strategies:
            cfg = dataclasses.replace(base_cfg, strategy=strat, seed=seed)
            out.append(run_strategy(cfg, corpus, scorer))
        return out

    reports: list[RunReport] = []
    if n_workers <= 1:
        for seed in seeds:
            reports.extend(run_seed(seed))
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            for chunk in pool.map(run_seed, seeds):
                reports.extend(chunk)
    return ComparisonTable(reports)
