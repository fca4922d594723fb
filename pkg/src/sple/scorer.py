"""Scorers and score-adaptation rules.

A scorer turns a sample into class scores plus an embedding, optionally under
a stochastic (dropout) pass identified by a seed. Two score conventions
exist:

* ``classes``: a probability vector over the task's classes (the built-in
  feed-forward reference classifier).
* ``entailment``: True/Neutral/False triples per supposition. Binary tasks
  score one supposition and keep only the True:False odds; multi-class tasks
  score one supposition per candidate label and rank their entail
  probabilities.
"""

from __future__ import annotations

import copy
import re
import struct
from dataclasses import dataclass

import numpy as np

from .data import Sample
from .errors import (
    ConfigurationError,
    DataFormatError,
    DegenerateScoreError,
    NumericalError,
    TemplateError,
)

ENTAILMENT_LABELS = ("entail", "neutral", "contradict")

_PLACEHOLDER = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")

CHECKPOINT_MAGIC = b"SPLC"
_CKPT_HEADER = struct.Struct("<4sIIII")


# ---------------------------------------------------------------------------
# Suppositions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SuppositionTemplate:
    """A statement pattern wrapping task inputs and a label description."""

    task: str
    pattern: str
    label_texts: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "label_texts", tuple(self.label_texts))
        if not _PLACEHOLDER.search(self.pattern):
            raise ConfigurationError(
                f"template {self.task!r}: pattern has no placeholders"
            )

    def placeholders(self) -> list[str]:
        return _PLACEHOLDER.findall(self.pattern)


BUILTIN_TEMPLATES: dict[str, SuppositionTemplate] = {
    t.task: t
    for t in (
        SuppositionTemplate("mnli", "{h} is entailed by {p}."),
        SuppositionTemplate("rte", "{h} is entailed by {p}."),
        SuppositionTemplate("qnli", "The answer to {q} is entailed by {t}."),
        SuppositionTemplate("qqp", "{q1}'s answer is entailed by {q2}'s answer."),
        SuppositionTemplate("sst2", "The movie is good is entailed by {x}."),
        SuppositionTemplate("label-text", "{label_text} is entailed by {x}."),
    )
}


def build_supposition(template: SuppositionTemplate, bindings: dict[str, str]) -> str:
    """Substitute bindings into the pattern, exactly and in one pass."""
    missing = [name for name in template.placeholders() if name not in bindings]
    if missing:
        raise TemplateError(
            f"template {template.task!r}: no binding for placeholder {{{missing[0]}}}"
        )
    return _PLACEHOLDER.sub(lambda m: bindings[m.group(1)], template.pattern)


def load_templates(path) -> dict[str, SuppositionTemplate]:
    """Read a JSONL template registry: {task, pattern, label_texts}."""
    import json

    registry = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                obj = json.loads(raw)
                t = SuppositionTemplate(
                    obj["task"], obj["pattern"], tuple(obj.get("label_texts", ()))
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise DataFormatError(f"{path}: line {lineno}: bad template: {exc}") from exc
            registry[t.task] = t
    return registry


def write_templates(registry: dict[str, SuppositionTemplate], path) -> None:
    import json

    with open(path, "w", encoding="utf-8") as fh:
        for t in registry.values():
            fh.write(
                json.dumps(
                    {"task": t.task, "pattern": t.pattern, "label_texts": list(t.label_texts)}
                )
                + "\n"
            )


# ---------------------------------------------------------------------------
# Entailment score adaptation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassScores:
    """A True/Neutral/False triple for one supposition."""

    entail: float
    neutral: float
    contradict: float

    def __post_init__(self):
        total = self.entail + self.neutral + self.contradict
        if abs(total - 1.0) > 1e-6:
            raise ConfigurationError(f"entailment triple sums to {total}, expected 1")
        if min(self.entail, self.neutral, self.contradict) < -1e-9:
            raise ConfigurationError("entailment scores must be non-negative")

    def as_array(self) -> np.ndarray:
        return np.array([self.entail, self.neutral, self.contradict], dtype=np.float64)

    @classmethod
    def from_array(cls, arr) -> "ClassScores":
        e, n, c = (float(v) for v in arr)
        return cls(e, n, c)


def binary_truth_prob(scores: ClassScores, on_degenerate: str = "error") -> tuple[float, float]:
    """Drop the neutral mass and renormalize to True/False probabilities.

    entail == contradict == 0 leaves the odds undefined; the default is a hard
    error, and ``on_degenerate="uniform"`` opts in to a 0.5/0.5 fallback.
    """
    denom = scores.entail + scores.contradict
    if denom <= 0.0:
        if on_degenerate == "uniform":
            return 0.5, 0.5
        raise DegenerateScoreError(
            "entail and contradict scores are both zero; cannot form True/False odds"
        )
    p_true = scores.entail / denom
    return p_true, 1.0 - p_true


def rank_multiclass(
    per_class_scores, renormalize: bool = False
) -> tuple[int, float]:
    """Pick the class whose supposition is most entailed.

    Ranks raw entail probabilities by default; ``renormalize`` ranks the
    neutral-free True probability instead. Ties go to the lowest class index.
    """
    triples = list(per_class_scores)
    if not triples:
        raise ValueError("rank_multiclass needs at least one supposition score")
    if renormalize:
        values = [binary_truth_prob(t)[0] for t in triples]
    else:
        values = [t.entail for t in triples]
    winner = int(np.argmax(values))
    return winner, float(values[winner])


def max_confidence_target(per_class_scores, winner: int) -> tuple[int, str]:
    """Training target for multi-class self-training: the winner supposition
    paired with its own predicted truth value. All other classes are ignored.
    """
    triples = list(per_class_scores)
    if not (0 <= winner < len(triples)):
        raise ValueError(f"winner index {winner} outside [0,{len(triples)})")
    truth = int(np.argmax(triples[winner].as_array()))
    return winner, ENTAILMENT_LABELS[truth]


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


# ---------------------------------------------------------------------------
# Scorer contract
# ---------------------------------------------------------------------------


class ScorerContract:
    """What every scorer provides.

    ``scores_kind`` is ``"classes"`` or ``"entailment"``. With
    ``stochastic=False``, score and embed are pure functions of the sample;
    with ``stochastic=True`` they are pure functions of (sample, pass_seed),
    and both outputs come from the same stochastic realization.

    Entailment scorers return one triple of shape (3,) for single-supposition
    tasks, or an (n_classes, 3) array plus (n_classes, e_dim) embeddings for
    multi-class ranking.
    """

    scores_kind = "classes"
    n_classes: int
    dropout_rate: float

    def score(self, sample: Sample, stochastic: bool = False, pass_seed: int = 0) -> np.ndarray:
        raise NotImplementedError

    def embed(self, sample: Sample, stochastic: bool = False, pass_seed: int = 0) -> np.ndarray:
        raise NotImplementedError

    def fit(
        self, pairs, learning_rate: float, epochs: int, batch_size: int | None = None
    ) -> "ScorerContract":
        raise NotImplementedError

    def clone(self) -> "ScorerContract":
        return copy.deepcopy(self)


class ReferenceClassifier(ScorerContract):
    """Two-layer feed-forward scorer with inverted dropout.

    Stochastic forward pass: input dropout, d -> h linear, tanh, hidden
    dropout, h -> n_classes linear, softmax. The embedding is the hidden
    layer exactly as the output layer consumes it in that pass (post
    dropout), so a record's label and embedding always come from one shared
    realization. Both masks come from one generator seeded with pass_seed
    (input mask first), making every pass reproducible. Dropout-free passes
    export the plain tanh hidden layer.

    ``init_gain`` scales the first-layer weight init; large values saturate
    the tanh units into sharper, more localized hidden features.

    fit is deterministic gradient descent on cross-entropy with dropout off.
    """

    scores_kind = "classes"

    def __init__(
        self,
        dimension: int,
        hidden: int = 32,
        n_classes: int = 2,
        dropout_rate: float = 0.1,
        seed: int = 0,
        init_gain: float = 1.0,
    ):
        if hidden < 1:
            raise ConfigurationError("hidden width must be >= 1")
        if not (0.0 <= dropout_rate < 1.0):
            raise ConfigurationError("dropout_rate must lie in [0, 1)")
        self.dimension = int(dimension)
        self.hidden = int(hidden)
        self.n_classes = int(n_classes)
        self.dropout_rate = float(dropout_rate)
        self.init_seed = int(seed)
        rng = np.random.default_rng(seed)
        self.w1 = rng.normal(
            0.0, init_gain / np.sqrt(self.dimension), size=(self.dimension, self.hidden)
        )
        self.b1 = np.zeros(self.hidden)
        self.w2 = rng.normal(0.0, 1.0 / np.sqrt(self.hidden), size=(self.hidden, self.n_classes))
        self.b2 = np.zeros(self.n_classes)

    @property
    def e_dim(self) -> int:
        return self.hidden

    def _features(self, sample: Sample) -> np.ndarray:
        if sample.features is None:
            raise ValueError(f"sample {sample.sample_id} has no feature vector")
        x = np.asarray(sample.features, dtype=np.float64)
        if x.shape != (self.dimension,):
            raise ValueError(
                f"sample {sample.sample_id}: feature length {x.shape[0]} != d={self.dimension}"
            )
        return x

    def _masks(self, pass_seed: int) -> tuple[np.ndarray, np.ndarray]:
        rng = np.random.default_rng(pass_seed)
        keep = 1.0 - self.dropout_rate
        m_in = (rng.random(self.dimension) >= self.dropout_rate) / keep
        m_hid = (rng.random(self.hidden) >= self.dropout_rate) / keep
        return m_in, m_hid

    def _forward(self, x: np.ndarray, stochastic: bool, pass_seed: int):
        if stochastic:
            m_in, m_hid = self._masks(pass_seed)
            hidden = np.tanh((x * m_in) @ self.w1 + self.b1) * m_hid
        else:
            hidden = np.tanh(x @ self.w1 + self.b1)
        return softmax(hidden @ self.w2 + self.b2), hidden

    def score(self, sample: Sample, stochastic: bool = False, pass_seed: int = 0) -> np.ndarray:
        return self._forward(self._features(sample), stochastic, pass_seed)[0]

    def embed(self, sample: Sample, stochastic: bool = False, pass_seed: int = 0) -> np.ndarray:
        return self._forward(self._features(sample), stochastic, pass_seed)[1]

    def loss_and_grads(self, x: np.ndarray, y: np.ndarray):
        """Mean cross-entropy and its gradients on a batch, dropout off."""
        n = x.shape[0]
        z1 = x @ self.w1 + self.b1
        hidden = np.tanh(z1)
        probs = softmax(hidden @ self.w2 + self.b2)
        loss = -np.mean(np.log(probs[np.arange(n), y] + 1e-300))
        dz2 = probs.copy()
        dz2[np.arange(n), y] -= 1.0
        dz2 /= n
        g_w2 = hidden.T @ dz2
        g_b2 = dz2.sum(axis=0)
        dz1 = (dz2 @ self.w2.T) * (1.0 - hidden**2)
        g_w1 = x.T @ dz1
        g_b1 = dz1.sum(axis=0)
        return loss, (g_w1, g_b1, g_w2, g_b2)

    def fit(
        self, pairs, learning_rate: float, epochs: int, batch_size: int | None = None
    ) -> "ReferenceClassifier":
        """Gradient descent on cross-entropy, dropout off.

        batch_size=None takes one full-batch step per epoch; otherwise each
        epoch sweeps fixed consecutive slices, so training stays
        deterministic either way.
        """
        pairs = list(pairs)
        if not pairs:
            return self
        x = np.stack([self._features(s) for s, _ in pairs])
        y = np.asarray([int(t) for _, t in pairs], dtype=np.int64)
        if np.any(y < 0) or np.any(y >= self.n_classes):
            raise ValueError("training target outside [0, n_classes)")
        step = len(pairs) if batch_size is None else int(batch_size)
        for _ in range(int(epochs)):
            for start in range(0, len(pairs), step):
                bx, by = x[start : start + step], y[start : start + step]
                loss, (g_w1, g_b1, g_w2, g_b2) = self.loss_and_grads(bx, by)
                if not np.isfinite(loss):
                    raise NumericalError(f"training loss became non-finite ({loss})")
                self.w1 -= learning_rate * g_w1
                self.b1 -= learning_rate * g_b1
                self.w2 -= learning_rate * g_w2
                self.b2 -= learning_rate * g_b2
        return self

    def predict(self, samples) -> np.ndarray:
        """Deterministic argmax labels for a batch of samples."""
        x = np.stack([self._features(s) for s in samples])
        probs = softmax(np.tanh(x @ self.w1 + self.b1) @ self.w2 + self.b2)
        return np.argmax(probs, axis=1)

    # -- checkpointing ------------------------------------------------------

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(
                _CKPT_HEADER.pack(
                    CHECKPOINT_MAGIC, 1, self.dimension, self.hidden, self.n_classes
                )
            )
            for arr in (self.w1, self.b1, self.w2, self.b2):
                fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())

    @classmethod
    def load(cls, path, dropout_rate: float = 0.1) -> "ReferenceClassifier":
        with open(path, "rb") as fh:
            blob = fh.read()
        if len(blob) < _CKPT_HEADER.size:
            raise DataFormatError(f"{path}: truncated checkpoint header at byte {len(blob)}")
        magic, version, d, h, k = _CKPT_HEADER.unpack_from(blob, 0)
        if magic != CHECKPOINT_MAGIC:
            raise DataFormatError(f"{path}: bad magic at byte 0, expected {CHECKPOINT_MAGIC!r}")
        if version != 1:
            raise DataFormatError(f"{path}: unsupported checkpoint version {version}")
        expected = _CKPT_HEADER.size + 4 * (d * h + h + h * k + k)
        if len(blob) != expected:
            raise DataFormatError(
                f"{path}: checkpoint length mismatch at byte {min(len(blob), expected)}: "
                f"have {len(blob)}, expected {expected}"
            )
        clf = cls(d, h, k, dropout_rate=dropout_rate, seed=0)
        off = _CKPT_HEADER.size
        for name, shape in (("w1", (d, h)), ("b1", (h,)), ("w2", (h, k)), ("b2", (k,))):
            count = int(np.prod(shape))
            arr = np.frombuffer(blob, dtype="<f4", count=count, offset=off).astype(np.float64)
            setattr(clf, name, arr.reshape(shape))
            off += 4 * count
        return clf
