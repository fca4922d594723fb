"""Generate a synthetic corpus and split off an unlabeled pool.

Shows the Gaussian-blob generator, the determinism contract, and how the
pool selector strips gold labels before anything downstream can see them.
"""

import numpy as np

from sple import SyntheticSpec, generate_synthetic_corpus, select_unlabeled

spec = SyntheticSpec(
    n_classes=2, dimension=8, samples_per_class=200, separation=1.2, noise_sigma=1.0, seed=42
)
corpus = generate_synthetic_corpus(spec)
print(f"corpus: {len(corpus)} samples, d={corpus.dimension}, task={corpus.task_kind}")

again = generate_synthetic_corpus(spec)
same = all(
    a.features.tobytes() == b.features.tobytes() for a, b in zip(corpus.samples, again.samples)
)
print(f"same seed reproduces the corpus bit for bit: {same}")

pool, held_out = select_unlabeled(corpus, 150, seed=7)
print(f"pool: {len(pool)} samples (gold stripped), held out: {len(held_out)}")
print(f"pool gold labels visible: {any(s.gold_label is not None for s in pool)}")

gold = np.array([s.gold_label for s in held_out])
print(f"held-out class balance: {np.bincount(gold)}")
