"""Label a pool with a dropout ensemble and look at pass disagreement.

Each sample is scored N times with a different dropout mask per pass; the
record set stores one pseudo-label, score vector, and embedding per pass.
"""

import numpy as np

from sple import (
    EnsembleConfig,
    ReferenceClassifier,
    SyntheticSpec,
    augmented_label,
    generate_synthetic_corpus,
    select_unlabeled,
)

corpus = generate_synthetic_corpus(SyntheticSpec(samples_per_class=150, seed=5))
pool, _ = select_unlabeled(corpus, 120, seed=5)

scorer = ReferenceClassifier(corpus.dimension, hidden=32, n_classes=2, dropout_rate=0.1, seed=0)
scorer.fit([(s, s.gold_label) for s in corpus.samples[:40]], learning_rate=0.3, epochs=12)

records = augmented_label(scorer, pool, EnsembleConfig(n_passes=7, dropout_rate=0.1, base_seed=1), "binary")
print(records)

splits = []
for sid in records.unique_sample_ids():
    labs = records.labels[records.sample_ids == sid]
    splits.append(int(min((labs == 0).sum(), (labs == 1).sum())))
splits = np.array(splits)
print(f"unanimous samples: {(splits == 0).sum()} of {len(splits)}")
print(f"split votes (minority size 1/2/3): "
      f"{(splits == 1).sum()}/{(splits == 2).sum()}/{(splits == 3).sum()}")

sid = records.unique_sample_ids()[int(np.argmax(splits))]
mask = records.sample_ids == sid
print(f"most contested sample {int(sid)}: labels per pass = {records.labels[mask].tolist()}")
print("its per-pass embeddings differ because each pass drops different units:")
print(np.round(records.embeddings[mask][:, :6], 3))
