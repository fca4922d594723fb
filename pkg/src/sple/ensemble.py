"""Augmented pseudo-labeling: N stochastic passes per sample.

Each (sample, pass) gets its own seed from a SplitMix64-style avalanche over
(base_seed, sample_id, pass_index), so record sets are reproducible across
platforms and independent of evaluation order. The mixing function is::

    mix(x)  = splitmix64 finalizer of x  (golden-ratio increment, two
              xor-multiply rounds, final xor-shift; all mod 2**64)
    seed    = mix(mix(mix(base_seed) ^ sample_id) ^ pass_index)

Test vectors: mix_pass_seed(0, 0, 0) == 0x238275BC38FCBE91,
mix_pass_seed(42, 7, 3) == 0xF55E4254D4655539 (see tests).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import EnsembleRecord, EnsembleRecordSet, Sample
from .errors import ConfigurationError
from .scorer import ClassScores, ScorerContract, binary_truth_prob, rank_multiclass

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def mix_pass_seed(base_seed: int, sample_id: int, pass_index: int) -> int:
    h = _splitmix64(base_seed & _MASK64)
    h = _splitmix64(h ^ (sample_id & _MASK64))
    h = _splitmix64(h ^ (pass_index & _MASK64))
    return h


@dataclass(frozen=True)
class EnsembleConfig:
    """Pass count, dropout rate, and base seed for augmented labeling."""

    n_passes: int = 7
    dropout_rate: float = 0.1
    base_seed: int = 0
    rank_renormalize: bool = False

    def __post_init__(self):
        if self.n_passes < 1:
            raise ConfigurationError("n_passes must be >= 1")
        if not (0.0 <= self.dropout_rate < 1.0):
            raise ConfigurationError("dropout_rate must lie in [0, 1)")


def _label_one(
    scorer: ScorerContract,
    sample: Sample,
    task_kind: str,
    stochastic: bool,
    pass_seed: int,
    rank_renormalize: bool = False,
):
    """One labeling pass. Returns (label, stored score vector, embedding)."""
    raw = np.asarray(scorer.score(sample, stochastic=stochastic, pass_seed=pass_seed))
    emb = np.asarray(scorer.embed(sample, stochastic=stochastic, pass_seed=pass_seed))
    if scorer.scores_kind == "classes":
        return int(np.argmax(raw)), raw, emb
    if task_kind == "multiclass":
        triples = [ClassScores.from_array(row) for row in raw]
        winner, _ = rank_multiclass(triples, renormalize=rank_renormalize)
        entail = np.asarray([t.entail for t in triples], dtype=np.float64)
        total = entail.sum()
        if total <= 0.0:
            from .errors import DegenerateScoreError

            raise DegenerateScoreError("all suppositions have zero entail mass")
        return winner, entail / total, emb[winner]
    p_true, _ = binary_truth_prob(ClassScores.from_array(raw))
    return (1 if p_true > 0.5 else 0), raw, emb


def deterministic_label(scorer: ScorerContract, sample: Sample, task_kind: str):
    """A single dropout-free pass; the tie/empty-vote fallback path."""
    return _label_one(scorer, sample, task_kind, stochastic=False, pass_seed=0)


def augmented_label(
    scorer: ScorerContract,
    pool,
    cfg: EnsembleConfig,
    task_kind: str,
) -> EnsembleRecordSet:
    """Run cfg.n_passes stochastic passes over every pool sample.

    Emits exactly len(pool) * n_passes records keyed by (sample_id, pass).
    The scorer's dropout rate is set to cfg.dropout_rate for the duration.
    """
    pool = list(pool)
    if not pool:
        raise ConfigurationError("unlabeled pool is empty")
    records = []
    saved_rate = scorer.dropout_rate
    scorer.dropout_rate = cfg.dropout_rate
    try:
        for sample in pool:
            for j in range(cfg.n_passes):
                seed = mix_pass_seed(cfg.base_seed, sample.sample_id, j)
                try:
                    label, scores, emb = _label_one(
                        scorer,
                        sample,
                        task_kind,
                        stochastic=True,
                        pass_seed=seed,
                        rank_renormalize=cfg.rank_renormalize,
                    )
                except Exception as exc:
                    raise type(exc)(
                        f"(sample {sample.sample_id}, pass {j}) {exc}"
                    ) from exc
                records.append(EnsembleRecord(sample.sample_id, j, label, scores, emb))
    finally:
        scorer.dropout_rate = saved_rate
    return EnsembleRecordSet.from_records(records, cfg.n_passes)
