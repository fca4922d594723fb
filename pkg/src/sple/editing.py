"""Pseudo-label editing: drop the most uncertain records, revote, fall back.

The edit never drops a sample. Removal happens at record level (one of a
sample's N passes); each sample's final label is the strict plurality of its
surviving passes, and samples left with no records or a tied vote are
relabeled by a single dropout-free pass.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .data import EnsembleRecordSet, Sample
from .ensemble import deterministic_label
from .errors import ConfigurationError, DataIntegrityError
from .uncertainty import UncertaintyReport


@dataclass(frozen=True)
class VoteOutcome:
    """Result of a per-sample vote: decided, tie, or empty."""

    kind: str
    label: int | None = None
    leaders: tuple[int, ...] = ()

    @classmethod
    def decided(cls, label: int) -> "VoteOutcome":
        return cls("decided", label=label)

    @classmethod
    def tie(cls, leaders) -> "VoteOutcome":
        return cls("tie", leaders=tuple(sorted(leaders)))

    @classmethod
    def empty(cls) -> "VoteOutcome":
        return cls("empty")


def majority_vote(labels) -> VoteOutcome:
    """Strict plurality vote: decided only if one label out-counts all others."""
    labels = list(labels)
    if not labels:
        return VoteOutcome.empty()
    counts = Counter(labels)
    top = max(counts.values())
    leaders = [lab for lab, c in counts.items() if c == top]
    if len(leaders) == 1:
        return VoteOutcome.decided(leaders[0])
    return VoteOutcome.tie(leaders)


def filter_uncertain(report: UncertaintyReport, fraction: float) -> set[tuple[int, int]]:
    """Drop the ceil(fraction * M*N) records with the highest s.

    Ties on s are resolved by key: the lower (sample_id, pass) is retained.
    Returns the surviving record keys.
    """
    if not (0.0 <= fraction <= 1.0):
        raise ConfigurationError(f"remove fraction {fraction} outside [0,1]")
    n = len(report)
    n_remove = math.ceil(fraction * n)
    order = np.lexsort((np.arange(n), report.s))  # ascending s, then key order
    keep = order[: n - n_remove]
    keys = report.keys()
    return {keys[i] for i in keep}


@dataclass(frozen=True)
class EditedLabel:
    sample_id: int
    final_label: int
    provenance: str  # "vote" | "fallback"
    votes_kept: int


class EditedLabelSet:
    """One final pseudo-label per sample; no sample is ever dropped."""

    def __init__(self, entries):
        self.entries = tuple(sorted(entries, key=lambda e: e.sample_id))
        seen = set()
        for e in self.entries:
            if e.sample_id in seen:
                raise DataIntegrityError(f"duplicate edited label for sample {e.sample_id}")
            seen.add(e.sample_id)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def labels(self) -> dict[int, int]:
        return {e.sample_id: e.final_label for e in self.entries}

    @property
    def fallback_count(self) -> int:
        return sum(1 for e in self.entries if e.provenance == "fallback")

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("sample_id,final_label,provenance,votes_kept\n")
            for e in self.entries:
                fh.write(f"{e.sample_id},{e.final_label},{e.provenance},{e.votes_kept}\n")


def edit_labels(
    record_set: EnsembleRecordSet,
    report: UncertaintyReport,
    fraction: float,
    scorer=None,
    pool=None,
    task_kind: str = "binary",
    fallback_labels: dict[int, int] | None = None,
) -> EditedLabelSet:
    """Filter, revote, and relabel. Every sample keeps exactly one label.

    Fallback labels for empty or tied votes come from a dropout-free scorer
    pass (``scorer`` + ``pool``) or from a precomputed ``fallback_labels``
    map when the labeling model is not available in-process.
    """
    retained = filter_uncertain(report, fraction)
    by_sample: dict[int, list[int]] = {int(sid): [] for sid in record_set.unique_sample_ids()}
    for i in range(len(record_set)):
        key = (int(record_set.sample_ids[i]), int(record_set.passes[i]))
        if key in retained:
            by_sample[key[0]].append(int(record_set.labels[i]))

    samples_by_id: dict[int, Sample] = {}
    if pool is not None:
        samples_by_id = {s.sample_id: s for s in pool}

    entries = []
    for sid, votes in by_sample.items():
        outcome = majority_vote(votes)
        if outcome.kind == "decided":
            entries.append(EditedLabel(sid, outcome.label, "vote", len(votes)))
            continue
        if fallback_labels is not None:
            if sid not in fallback_labels:
                raise DataIntegrityError(f"no fallback label for sample {sid}")
            label = int(fallback_labels[sid])
        elif scorer is not None:
            if sid not in samples_by_id:
                raise DataIntegrityError(f"no pool sample for fallback relabeling of {sid}")
            label, _, _ = deterministic_label(scorer, samples_by_id[sid], task_kind)
        else:
            raise DataIntegrityError(
                f"sample {sid} needs fallback relabeling but no scorer or "
                "fallback labels were provided"
            )
        entries.append(EditedLabel(sid, label, "fallback", len(votes)))
    return EditedLabelSet(entries)
