"""Walk through the full edit: filter uncertain records, revote, fall back.

Uses a planted instance where one sample's records all sit inside clusters
of the opposite label, so the filter removes every one of them and the
sample is relabeled by a dropout-free pass.
"""

import numpy as np

from sple import (
    EnsembleRecord,
    EnsembleRecordSet,
    Sample,
    edit_labels,
    filter_uncertain,
    majority_vote,
    uncertainty_scores,
)
from sple.scorer import ScorerContract

print("vote semantics:", majority_vote([1, 1, 0]), majority_vote([1, 0]), majority_vote([]))

rng = np.random.default_rng(0)
spots = [10 * np.array([np.cos(2 * np.pi * i / 5), np.sin(2 * np.pi * i / 5)]) for i in range(5)]
cluster_labels = [0, 0, 0, 1, 1]
records = []
for sid in range(5):
    for j in range(3):
        emb = spots[sid] + 0.01 * rng.normal(size=2)
        records.append(EnsembleRecord(sid, j, cluster_labels[sid], np.array([0.5, 0.5]), emb))
for j in range(3):  # sample 5 infiltrates the three label-0 clusters, labeled 1
    records.append(EnsembleRecord(5, j, 1, np.array([0.5, 0.5]), spots[j] + 0.01 * rng.normal(size=2)))
rs = EnsembleRecordSet.from_records(records, 3)

report = uncertainty_scores(rs, 4)
worst = np.argsort(report.s)[-3:]
print("three most uncertain records:", [(int(report.sample_ids[i]), int(report.passes[i])) for i in worst])

retained = filter_uncertain(report, 1 / 6)
print(f"filter at f=1/6 keeps {len(retained)} of {len(rs)} records")


class ConstantScorer(ScorerContract):
    """Stands in for the labeling model during fallback relabeling."""

    n_classes = 2
    dropout_rate = 0.0

    def score(self, sample, stochastic=False, pass_seed=0):
        return np.array([0.2, 0.8])

    def embed(self, sample, stochastic=False, pass_seed=0):
        return np.zeros(2)

    def fit(self, pairs, learning_rate, epochs, batch_size=None):
        return self


pool = [Sample(i, features=np.zeros(1, dtype=np.float32)) for i in range(6)]
edited = edit_labels(rs, report, 1 / 6, scorer=ConstantScorer(), pool=pool, task_kind="binary")
for entry in edited:
    print(f"sample {entry.sample_id}: label={entry.final_label} via {entry.provenance} "
          f"({entry.votes_kept} votes kept)")
