"""Desk-scale synthetic benchmark: Gaussian corpus plus a weak scorer.

The weak scorer stands in for a model pretrained elsewhere and transferred
to this task: a saturated-feature reference classifier briefly fitted on a
tiny labeled seed split, then deliberately miscalibrated so its predicted
label priors skew the way transferred zero-shot labelers skew in practice
(roughly a 2:1 majority). The skew is set by shifting the output bias until
a fresh probe sample, drawn from the same geometry but disjoint from the
corpus, predicts the majority class at the target share.

The seed split is carved out of the corpus before anything else, so neither
the unlabeled pool nor the held-out evaluation split ever sees it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LabeledCorpus, SyntheticSpec, generate_synthetic_corpus
from .scorer import ReferenceClassifier


@dataclass(frozen=True)
class BenchmarkSpec:
    """Corpus geometry plus weak-scorer construction knobs."""

    n_classes: int = 2
    dimension: int = 8
    separation: float = 1.2
    noise_sigma: float = 1.0
    samples_per_class: int = 500
    seed_labeled: int = 40
    hidden: int = 32
    dropout_rate: float = 0.1
    init_gain: float = 5.0
    pretrain_epochs: int = 12
    pretrain_lr: float = 0.3
    # Predicted majority-class share the weak scorer is miscalibrated to;
    # 0 disables the shift.
    miscalibrated_share: float = 0.66
    probe_per_class: int = 150


DEFAULT_BENCHMARK = BenchmarkSpec()

# The balance-shift scenario: label priors skewed to roughly 70/30.
BIASED_BENCHMARK = BenchmarkSpec(miscalibrated_share=0.71)


def _calibrate_share(clf: ReferenceClassifier, spec: BenchmarkSpec, seed: int) -> None:
    """Shift the class-0 output bias until a fresh probe set predicts class 0
    at the target share. Binary search over the logit offset."""
    probe = generate_synthetic_corpus(
        SyntheticSpec(
            n_classes=spec.n_classes,
            dimension=spec.dimension,
            samples_per_class=spec.probe_per_class,
            separation=spec.separation,
            noise_sigma=spec.noise_sigma,
            seed=seed + 7919,
        )
    )
    x = np.stack([s.features.astype(np.float64) for s in probe.samples])
    logits = np.tanh(x @ clf.w1 + clf.b1) @ clf.w2 + clf.b2
    others = np.max(logits[:, 1:], axis=1)
    lo, hi = -6.0, 6.0
    for _ in range(50):
        mid = (lo + hi) / 2
        share0 = np.mean(logits[:, 0] + mid > others)
        if share0 < spec.miscalibrated_share:
            lo = mid
        else:
            hi = mid
    clf.b2[0] += (lo + hi) / 2


def make_benchmark(
    spec: BenchmarkSpec = DEFAULT_BENCHMARK, seed: int = 0
) -> tuple[LabeledCorpus, ReferenceClassifier]:
    """Build (corpus, weak scorer) for one benchmark seed.

    Returns the corpus minus the pretraining seed split; callers draw their
    unlabeled pool and evaluation split from it.
    """
    corpus = generate_synthetic_corpus(
        SyntheticSpec(
            n_classes=spec.n_classes,
            dimension=spec.dimension,
            samples_per_class=spec.samples_per_class,
            separation=spec.separation,
            noise_sigma=spec.noise_sigma,
            seed=seed,
        )
    )
    rng = np.random.default_rng([seed, 0xBE])
    perm = rng.permutation(len(corpus))
    seed_idx = perm[: spec.seed_labeled]
    rest_idx = np.sort(perm[spec.seed_labeled :])

    scorer = ReferenceClassifier(
        spec.dimension,
        hidden=spec.hidden,
        n_classes=spec.n_classes,
        dropout_rate=spec.dropout_rate,
        seed=int(rng.integers(0, 2**31)),
        init_gain=spec.init_gain,
    )
    pretrain_pairs = [
        (corpus.samples[i], corpus.samples[i].gold_label) for i in seed_idx
    ]
    scorer.fit(pretrain_pairs, spec.pretrain_lr, spec.pretrain_epochs)
    if spec.miscalibrated_share:
        _calibrate_share(scorer, spec, seed)

    rest = LabeledCorpus(
        corpus.dimension,
        corpus.n_classes,
        corpus.task_kind,
        tuple(corpus.samples[i] for i in rest_idx),
    )
    return rest, scorer
