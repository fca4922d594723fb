import numpy as np
import pytest

from sple.data import EnsembleRecord, EnsembleRecordSet, Sample
from sple.scorer import ScorerContract


def random_record_set(rng, m=None, n=None, e_dim=None, n_classes=None) -> EnsembleRecordSet:
    """A valid random record set; uninteresting labels, scores, embeddings."""
    m = m if m is not None else int(rng.integers(2, 12))
    n = n if n is not None else int(rng.integers(1, 5))
    e_dim = e_dim if e_dim is not None else int(rng.integers(1, 6))
    n_classes = n_classes if n_classes is not None else int(rng.integers(2, 5))
    records = []
    sample_ids = rng.choice(10 * m, size=m, replace=False)
    for sid in sample_ids:
        for j in range(n):
            scores = rng.random(n_classes) + 1e-3
            scores = scores / scores.sum()
            records.append(
                EnsembleRecord(
                    int(sid),
                    j,
                    int(rng.integers(0, n_classes)),
                    scores.astype(np.float32),
                    rng.normal(size=e_dim).astype(np.float32),
                )
            )
    return EnsembleRecordSet.from_records(records, n)


class TableScorer(ScorerContract):
    """Scorer driven by lookup tables, for pipeline tests.

    scores/embeddings map sample_id -> value; stochastic passes return the
    same values unless a (sample_id, pass_seed) override is present.
    """

    def __init__(self, scores, embeddings, n_classes=2, kind="classes", overrides=None):
        self.scores_kind = kind
        self.n_classes = n_classes
        self.dropout_rate = 0.0
        self._scores = scores
        self._embeddings = embeddings
        self._overrides = overrides or {}
        self.fit_calls = []

    def score(self, sample, stochastic=False, pass_seed=0):
        if stochastic and (sample.sample_id, pass_seed) in self._overrides:
            return np.asarray(self._overrides[(sample.sample_id, pass_seed)][0])
        return np.asarray(self._scores[sample.sample_id])

    def embed(self, sample, stochastic=False, pass_seed=0):
        if stochastic and (sample.sample_id, pass_seed) in self._overrides:
            return np.asarray(self._overrides[(sample.sample_id, pass_seed)][1])
        return np.asarray(self._embeddings[sample.sample_id])

    def fit(self, pairs, learning_rate, epochs, batch_size=None):
        self.fit_calls.append((list(pairs), learning_rate, epochs))
        return self


class SeedEchoScorer(ScorerContract):
    """Encodes the pass seed into both outputs, from one shared realization.

    Exposes whether a record's label and embedding came from the same
    stochastic draw: the label flips with the seed's low bit and the
    embedding stores the seed itself.
    """

    scores_kind = "classes"

    def __init__(self, n_classes=2):
        self.n_classes = n_classes
        self.dropout_rate = 0.0

    def _draw(self, sample, stochastic, pass_seed):
        seed = pass_seed if stochastic else 0
        return seed & 1, seed

    def score(self, sample, stochastic=False, pass_seed=0):
        bit, _ = self._draw(sample, stochastic, pass_seed)
        out = np.full(self.n_classes, 0.0)
        out[bit] = 1.0
        return out

    def embed(self, sample, stochastic=False, pass_seed=0):
        _, seed = self._draw(sample, stochastic, pass_seed)
        # Two 16-bit words survive float32 storage exactly.
        return np.array([float(seed & 0xFFFF), float((seed >> 16) & 0xFFFF)])

    def fit(self, pairs, learning_rate, epochs, batch_size=None):
        return self


def feature_samples(features, gold=None):
    gold = gold if gold is not None else [None] * len(features)
    return [Sample(i, features=np.asarray(f), gold_label=g) for i, (f, g) in enumerate(zip(features, gold))]


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
