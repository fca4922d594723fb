"""Corpus and record containers, synthetic corpus generation, and file formats.

Two interchangeable on-disk encodings exist for ensemble record sets:

* JSONL: a header line ``{"magic":"SPLE-JSONL","version":1,"m":M,"n":N,
  "e_dim":E,"n_classes":K}`` followed by one record object per line with the
  keys ``sample_id``, ``pass``, ``label``, ``scores``, ``embedding``.
* Binary, little-endian: magic ``SPLE``, version u32=1, M u64, N u32,
  e_dim u32, n_classes u32, then M*N frames of
  ``sample_id u64, pass u32, label i32, K float32, E float32`` (no padding).

Both store reals as 32-bit floats, so a write/load round trip is bit-exact.
``n_classes`` in the header is the per-record score-vector length: the class
count for classifier-style scores, or 3 when raw entailment triples are
stored.
"""

from __future__ import annotations

import dataclasses
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConfigurationError,
    DataFormatError,
    DataIntegrityError,
    SizeError,
)

TASK_KINDS = ("binary", "multiclass", "sentence-pair")

JSONL_MAGIC = "SPLE-JSONL"
CORPUS_MAGIC = "SPLE-CORPUS"
BINARY_MAGIC = b"SPLE"
FORMAT_VERSION = 1

_BIN_HEADER = struct.Struct("<4sIQIII")
_BIN_FRAME_FIXED = struct.Struct("<QIi")


def _f32(values) -> np.ndarray:
    return np.asarray(values, dtype=np.float32)


def _json_floats(arr: np.ndarray) -> list[float]:
    # float(np.float32) is exact, and json round-trips doubles exactly.
    return [float(v) for v in arr]


@dataclass(frozen=True)
class Sample:
    """One corpus entry: dense features or raw text fields, never both."""

    sample_id: int
    features: np.ndarray | None = None
    text: dict[str, str] | None = None
    gold_label: int | None = None

    def __post_init__(self):
        if self.sample_id < 0:
            raise ConfigurationError(f"sample_id must be non-negative, got {self.sample_id}")
        if (self.features is None) == (self.text is None):
            raise ConfigurationError(
                f"sample {self.sample_id}: exactly one of features/text must be present"
            )
        if self.features is not None:
            object.__setattr__(self, "features", _f32(self.features))


@dataclass(frozen=True)
class LabeledCorpus:
    """An ordered sample collection with task metadata.

    ``dimension`` is 0 for text corpora. Gold labels ride along for
    evaluation; the unlabeled-pool selector strips them before anything
    downstream can train on them.
    """

    dimension: int
    n_classes: int
    task_kind: str
    samples: tuple[Sample, ...]

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        if self.task_kind not in TASK_KINDS:
            raise ConfigurationError(f"unknown task_kind {self.task_kind!r}")
        if self.n_classes < 2:
            raise ConfigurationError("n_classes must be at least 2")
        if self.task_kind == "binary" and self.n_classes != 2:
            raise ConfigurationError("binary task_kind requires n_classes == 2")
        seen = set()
        for s in self.samples:
            if s.sample_id in seen:
                raise DataIntegrityError(f"duplicate sample_id {s.sample_id}")
            seen.add(s.sample_id)
            if s.features is not None and len(s.features) != self.dimension:
                raise ConfigurationError(
                    f"sample {s.sample_id}: feature length {len(s.features)} != d={self.dimension}"
                )
            if s.gold_label is not None and not (0 <= s.gold_label < self.n_classes):
                raise ConfigurationError(
                    f"sample {s.sample_id}: gold label {s.gold_label} outside [0,{self.n_classes})"
                )

    def __len__(self) -> int:
        return len(self.samples)

    def by_id(self) -> dict[int, Sample]:
        return {s.sample_id: s for s in self.samples}

    def gold_map(self) -> dict[int, int]:
        return {s.sample_id: s.gold_label for s in self.samples if s.gold_label is not None}


@dataclass(frozen=True)
class EnsembleRecord:
    """One (sample, pass) observation: pseudo-label, scores, embedding."""

    sample_id: int
    pass_index: int
    label: int
    scores: np.ndarray
    embedding: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "scores", _f32(self.scores))
        object.__setattr__(self, "embedding", _f32(self.embedding))

    @property
    def key(self) -> tuple[int, int]:
        return (self.sample_id, self.pass_index)


class EnsembleRecordSet:
    """M samples x N passes of labels, scores, and embeddings.

    Records are held in canonical order, sorted by (sample_id, pass), so two
    sets built from the same observations in any order compare equal. All
    float payloads are float32.
    """

    def __init__(
        self,
        n_passes: int,
        e_dim: int,
        n_classes: int,
        sample_ids,
        passes,
        labels,
        scores,
        embeddings,
    ):
        self.n_passes = int(n_passes)
        self.e_dim = int(e_dim)
        self.n_classes = int(n_classes)
        self.sample_ids = np.asarray(sample_ids, dtype=np.int64)
        self.passes = np.asarray(passes, dtype=np.int32)
        self.labels = np.asarray(labels, dtype=np.int32)
        self.scores = _f32(scores).reshape(len(self.sample_ids), self.n_classes)
        self.embeddings = _f32(embeddings).reshape(len(self.sample_ids), self.e_dim)
        self._canonicalize()
        self._validate()

    def _canonicalize(self) -> None:
        order = np.lexsort((self.passes, self.sample_ids))
        self.sample_ids = self.sample_ids[order]
        self.passes = self.passes[order]
        self.labels = self.labels[order]
        self.scores = self.scores[order]
        self.embeddings = self.embeddings[order]

    def _validate(self) -> None:
        if self.n_passes < 1:
            raise ConfigurationError("n_passes must be >= 1")
        n = len(self.sample_ids)
        if n % self.n_passes != 0:
            raise DataIntegrityError(
                f"{n} records cannot split into groups of {self.n_passes} passes"
            )
        ids, counts = np.unique(self.sample_ids, return_counts=True)
        bad = np.flatnonzero(counts != self.n_passes)
        if bad.size:
            raise DataIntegrityError(
                f"sample {int(ids[bad[0]])} has {int(counts[bad[0]])} records, "
                f"expected {self.n_passes}"
            )
        # Within each sample the pass indices must be exactly 0..N-1.
        expect = np.tile(np.arange(self.n_passes, dtype=np.int32), len(ids))
        if not np.array_equal(self.passes, expect):
            raise DataIntegrityError("pass indices are not exactly 0..N-1 for every sample")
        if np.any(self.labels < 0) or np.any(self.labels >= self.n_classes):
            raise DataIntegrityError("label outside [0, n_classes)")
        if not np.all(np.isfinite(self.scores)) or not np.all(np.isfinite(self.embeddings)):
            raise DataIntegrityError("non-finite score or embedding values")
        if np.any(self.scores < -1e-6) or np.any(self.scores > 1 + 1e-6):
            raise DataIntegrityError("scores outside [0,1]")
        sums = self.scores.astype(np.float64).sum(axis=1)
        if np.any(np.abs(sums - 1.0) > 1e-4):
            raise DataIntegrityError("a score vector does not sum to 1 within 1e-4")

    @classmethod
    def from_records(cls, records, n_passes: int) -> "EnsembleRecordSet":
        records = list(records)
        if not records:
            raise DataIntegrityError("record set is empty")
        e_dim = len(records[0].embedding)
        k = len(records[0].scores)
        for r in records:
            if len(r.embedding) != e_dim:
                raise DataIntegrityError(
                    f"record {r.key}: embedding length {len(r.embedding)} != {e_dim}"
                )
            if len(r.scores) != k:
                raise DataIntegrityError(f"record {r.key}: score length {len(r.scores)} != {k}")
        return cls(
            n_passes,
            e_dim,
            k,
            [r.sample_id for r in records],
            [r.pass_index for r in records],
            [r.label for r in records],
            np.stack([r.scores for r in records]),
            np.stack([r.embedding for r in records]),
        )

    @property
    def m(self) -> int:
        return len(self.sample_ids) // self.n_passes

    def __len__(self) -> int:
        return len(self.sample_ids)

    def __iter__(self):
        for i in range(len(self)):
            yield EnsembleRecord(
                int(self.sample_ids[i]),
                int(self.passes[i]),
                int(self.labels[i]),
                self.scores[i],
                self.embeddings[i],
            )

    def unique_sample_ids(self) -> np.ndarray:
        return self.sample_ids[:: self.n_passes].copy()

    def __eq__(self, other) -> bool:
        if not isinstance(other, EnsembleRecordSet):
            return NotImplemented
        return (
            self.n_passes == other.n_passes
            and self.e_dim == other.e_dim
            and self.n_classes == other.n_classes
            and np.array_equal(self.sample_ids, other.sample_ids)
            and np.array_equal(self.passes, other.passes)
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.scores, other.scores)
            and np.array_equal(self.embeddings, other.embeddings)
        )

    def __repr__(self) -> str:
        return (
            f"EnsembleRecordSet(m={self.m}, n={self.n_passes}, "
            f"e_dim={self.e_dim}, n_classes={self.n_classes})"
        )


@dataclass(frozen=True)
class SyntheticSpec:
    """Knobs for the Gaussian-blob corpus generator.

    Class c is centered at ``separation * e_c`` with e_c the c-th standard
    basis vector, so the geometry is fixed by the knobs alone. noise_sigma=0
    places every sample exactly on its class mean.
    """

    n_classes: int = 2
    dimension: int = 8
    samples_per_class: int = 500
    separation: float = 1.2
    noise_sigma: float = 1.0
    seed: int = 0

    def validate(self) -> None:
        if self.n_classes < 2:
            raise ConfigurationError("n_classes must be >= 2")
        if self.dimension < self.n_classes:
            raise ConfigurationError(
                f"dimension {self.dimension} < n_classes {self.n_classes}; "
                "axis-aligned class means need one axis per class"
            )
        if self.samples_per_class < 1:
            raise ConfigurationError("samples_per_class must be positive")
        if not (np.isfinite(self.separation) and self.separation > 0):
            raise ConfigurationError("separation must be positive and finite")
        if not (np.isfinite(self.noise_sigma) and self.noise_sigma >= 0):
            raise ConfigurationError("noise_sigma must be >= 0 and finite")


def class_means(spec: SyntheticSpec) -> np.ndarray:
    means = np.zeros((spec.n_classes, spec.dimension), dtype=np.float64)
    for c in range(spec.n_classes):
        means[c, c] = spec.separation
    return means


def generate_synthetic_corpus(spec: SyntheticSpec) -> LabeledCorpus:
    """Draw an isotropic Gaussian blob per class, deterministically by seed."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    means = class_means(spec)
    samples = []
    sid = 0
    for c in range(spec.n_classes):
        noise = rng.normal(0.0, 1.0, size=(spec.samples_per_class, spec.dimension))
        feats = means[c] + spec.noise_sigma * noise
        for row in feats:
            samples.append(Sample(sid, features=row, gold_label=c))
            sid += 1
    task = "binary" if spec.n_classes == 2 else "multiclass"
    return LabeledCorpus(spec.dimension, spec.n_classes, task, tuple(samples))


def select_unlabeled(
    corpus: LabeledCorpus, n: int, seed: int
) -> tuple[list[Sample], list[Sample]]:
    """Split off n samples, gold labels stripped, leaving the rest for eval.

    Uniform without replacement; the pool keeps corpus order. Pool and eval
    are disjoint and jointly cover the corpus.
    """
    if n < 0:
        raise ConfigurationError("pool size must be non-negative")
    if n > len(corpus):
        raise SizeError(f"requested pool of {n} from a corpus of {len(corpus)}")
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.permutation(len(corpus))[:n])
    mask = np.zeros(len(corpus), dtype=bool)
    mask[chosen] = True
    pool = [dataclasses.replace(corpus.samples[i], gold_label=None) for i in np.flatnonzero(mask)]
    held = [corpus.samples[i] for i in np.flatnonzero(~mask)]
    return pool, held


# ---------------------------------------------------------------------------
# Record set files
# ---------------------------------------------------------------------------


def write_records(record_set: EnsembleRecordSet, path, format: str = "jsonl") -> None:
    if format == "jsonl":
        _write_records_jsonl(record_set, path)
    elif format == "binary":
        _write_records_binary(record_set, path)
    else:
        raise ConfigurationError(f"unknown record format {format!r}")


def load_records(path) -> EnsembleRecordSet:
    """Load a record file, sniffing JSONL vs binary from the first byte."""
    with open(path, "rb") as fh:
        first = fh.read(1)
    if first == b"{":
        return _load_records_jsonl(path)
    return _load_records_binary(path)


def _write_records_jsonl(rs: EnsembleRecordSet, path) -> None:
    header = {
        "magic": JSONL_MAGIC,
        "version": FORMAT_VERSION,
        "m": rs.m,
        "n": rs.n_passes,
        "e_dim": rs.e_dim,
        "n_classes": rs.n_classes,
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for i in range(len(rs)):
            line = {
                "sample_id": int(rs.sample_ids[i]),
                "pass": int(rs.passes[i]),
                "label": int(rs.labels[i]),
                "scores": _json_floats(rs.scores[i]),
                "embedding": _json_floats(rs.embeddings[i]),
            }
            fh.write(json.dumps(line) + "\n")


def _load_records_jsonl(path) -> EnsembleRecordSet:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataFormatError(f"{path}: empty file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: line 1: invalid JSON header: {exc}") from exc
    if not isinstance(header, dict) or header.get("magic") != JSONL_MAGIC:
        raise DataFormatError(f"{path}: line 1: bad magic, expected {JSONL_MAGIC!r}")
    if header.get("version") != FORMAT_VERSION:
        raise DataFormatError(f"{path}: line 1: unsupported version {header.get('version')}")
    try:
        m, n = int(header["m"]), int(header["n"])
        e_dim, k = int(header["e_dim"]), int(header["n_classes"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"{path}: line 1: incomplete header: {exc}") from exc
    body = lines[1:]
    if len(body) != m * n:
        raise DataFormatError(f"{path}: expected {m * n} record lines, found {len(body)}")
    ids = np.empty(m * n, dtype=np.int64)
    passes = np.empty(m * n, dtype=np.int32)
    labels = np.empty(m * n, dtype=np.int32)
    scores = np.empty((m * n, k), dtype=np.float32)
    embeddings = np.empty((m * n, e_dim), dtype=np.float32)
    for i, raw in enumerate(body):
        lineno = i + 2
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: line {lineno}: invalid JSON: {exc}") from exc
        try:
            ids[i] = obj["sample_id"]
            passes[i] = obj["pass"]
            labels[i] = obj["label"]
            sc, emb = obj["scores"], obj["embedding"]
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"{path}: line {lineno}: bad record: {exc}") from exc
        if len(sc) != k:
            raise DataFormatError(f"{path}: line {lineno}: {len(sc)} scores, expected {k}")
        if len(emb) != e_dim:
            raise DataFormatError(
                f"{path}: line {lineno}: embedding length {len(emb)}, expected {e_dim}"
            )
        scores[i] = _f32(sc)
        embeddings[i] = _f32(emb)
    return EnsembleRecordSet(n, e_dim, k, ids, passes, labels, scores, embeddings)


def binary_frame_size(n_classes: int, e_dim: int) -> int:
    return _BIN_FRAME_FIXED.size + 4 * (n_classes + e_dim)


def binary_header_size() -> int:
    return _BIN_HEADER.size


def _write_records_binary(rs: EnsembleRecordSet, path) -> None:
    with open(path, "wb") as fh:
        fh.write(
            _BIN_HEADER.pack(BINARY_MAGIC, FORMAT_VERSION, rs.m, rs.n_passes, rs.e_dim, rs.n_classes)
        )
        for i in range(len(rs)):
            fh.write(
                _BIN_FRAME_FIXED.pack(int(rs.sample_ids[i]), int(rs.passes[i]), int(rs.labels[i]))
            )
            fh.write(rs.scores[i].astype("<f4").tobytes())
            fh.write(rs.embeddings[i].astype("<f4").tobytes())


def _load_records_binary(path) -> EnsembleRecordSet:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _BIN_HEADER.size:
        raise DataFormatError(f"{path}: truncated header at byte {len(blob)}")
    magic, version, m, n, e_dim, k = _BIN_HEADER.unpack_from(blob, 0)
    if magic != BINARY_MAGIC:
        raise DataFormatError(f"{path}: bad magic at byte 0, expected {BINARY_MAGIC!r}")
    if version != FORMAT_VERSION:
        raise DataFormatError(f"{path}: unsupported version {version} at byte 4")
    frame = binary_frame_size(k, e_dim)
    expected = _BIN_HEADER.size + m * n * frame
    if len(blob) != expected:
        off = min(len(blob), expected)
        raise DataFormatError(
            f"{path}: payload length mismatch at byte {off}: have {len(blob)}, expected {expected}"
        )
    count = m * n
    ids = np.empty(count, dtype=np.int64)
    passes = np.empty(count, dtype=np.int32)
    labels = np.empty(count, dtype=np.int32)
    scores = np.empty((count, k), dtype=np.float32)
    embeddings = np.empty((count, e_dim), dtype=np.float32)
    off = _BIN_HEADER.size
    for i in range(count):
        sid, p, lab = _BIN_FRAME_FIXED.unpack_from(blob, off)
        off += _BIN_FRAME_FIXED.size
        scores[i] = np.frombuffer(blob, dtype="<f4", count=k, offset=off)
        off += 4 * k
        embeddings[i] = np.frombuffer(blob, dtype="<f4", count=e_dim, offset=off)
        off += 4 * e_dim
        ids[i], passes[i], labels[i] = sid, p, lab
    return EnsembleRecordSet(n, e_dim, k, ids, passes, labels, scores, embeddings)


# ---------------------------------------------------------------------------
# Corpus files
# ---------------------------------------------------------------------------


def write_corpus(corpus: LabeledCorpus, path) -> None:
    header = {
        "magic": CORPUS_MAGIC,
        "version": FORMAT_VERSION,
        "d": corpus.dimension,
        "n_classes": corpus.n_classes,
        "task_kind": corpus.task_kind,
        "count": len(corpus),
    }
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header) + "\n")
        for s in corpus.samples:
            if s.features is None:
                raise ConfigurationError("corpus files hold feature corpora only")
            fh.write(
                json.dumps(
                    {
                        "sample_id": s.sample_id,
                        "features": _json_floats(s.features),
                        "gold_label": s.gold_label,
                    }
                )
                + "\n"
            )


def load_corpus(path) -> LabeledCorpus:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DataFormatError(f"{path}: empty file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: line 1: invalid JSON header: {exc}") from exc
    if not isinstance(header, dict) or header.get("magic") != CORPUS_MAGIC:
        raise DataFormatError(f"{path}: line 1: bad magic, expected {CORPUS_MAGIC!r}")
    try:
        d = int(header["d"])
        k = int(header["n_classes"])
        task = header["task_kind"]
        count = int(header["count"])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"{path}: line 1: incomplete header: {exc}") from exc
    if len(lines) - 1 != count:
        raise DataFormatError(f"{path}: expected {count} samples, found {len(lines) - 1}")
    samples = []
    for i, raw in enumerate(lines[1:]):
        lineno = i + 2
        try:
            obj = json.loads(raw)
            samples.append(
                Sample(
                    int(obj["sample_id"]),
                    features=_f32(obj["features"]),
                    gold_label=None if obj.get("gold_label") is None else int(obj["gold_label"]),
                )
            )
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise DataFormatError(f"{path}: line {lineno}: bad sample: {exc}") from exc
    return LabeledCorpus(d, k, task, tuple(samples))
