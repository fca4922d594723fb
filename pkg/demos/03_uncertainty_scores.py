"""Score record uncertainty with the cut-edge statistic.

A record is uncertain when its nearest neighbors in embedding space carry
different pseudo-labels more often than a random relabeling would predict.
The demo prints the most and least certain records and checks the math on a
tiny hand-built instance.
"""

import numpy as np

from sple import (
    EnsembleConfig,
    EnsembleRecord,
    EnsembleRecordSet,
    ReferenceClassifier,
    SyntheticSpec,
    augmented_label,
    generate_synthetic_corpus,
    select_unlabeled,
    uncertainty_scores,
)

# Hand-built instance: two records disagree at unit distance around record 0.
records = [
    EnsembleRecord(0, 0, 0, np.array([0.5, 0.5]), np.array([0.0])),
    EnsembleRecord(1, 0, 1, np.array([0.5, 0.5]), np.array([1.0])),
    EnsembleRecord(2, 0, 1, np.array([0.5, 0.5]), np.array([-1.0])),
    EnsembleRecord(3, 0, 0, np.array([0.5, 0.5]), np.array([50.0])),
]
tiny = EnsembleRecordSet.from_records(records, 1)
report = uncertainty_scores(tiny, 2)
print("hand-built instance, record 0:")
print(f"  J = {report.j[0]:.4f} (two disagreeing neighbors at distance 1 -> 0.5 + 0.5)")
print(f"  E = {report.e_j[0]:.4f}, sigma = {report.sigma_j[0]:.4f}, s = {report.s[0]:.4f}")

# A realistic record set from the dropout ensemble.
corpus = generate_synthetic_corpus(SyntheticSpec(samples_per_class=150, seed=9))
pool, _ = select_unlabeled(corpus, 120, seed=9)
scorer = ReferenceClassifier(corpus.dimension, hidden=32, n_classes=2, seed=1)
scorer.fit([(s, s.gold_label) for s in corpus.samples[:40]], 0.3, 12)
rs = augmented_label(scorer, pool, EnsembleConfig(7, 0.1, 3), "binary")
rep = uncertainty_scores(rs, 9)

order = np.argsort(rep.s)
print("\nmost certain records (lowest s):")
for i in order[:3]:
    print(f"  sample {rep.sample_ids[i]} pass {rep.passes[i]}: s={rep.s[i]:+.3f} J={rep.j[i]:.3f}")
print("most uncertain records (highest s):")
for i in order[-3:]:
    print(f"  sample {rep.sample_ids[i]} pass {rep.passes[i]}: s={rep.s[i]:+.3f} J={rep.j[i]:.3f}")
