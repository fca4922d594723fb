"""Cut-edge uncertainty scoring over record embeddings.

For record u with pseudo-label y_u and nearest neighbors N(u):

    J_u     = sum over v in N(u) of [y_u != y_v] / (1 + d(u,v))
    E_J     = (1 - P_hat(y_u)) * sum 1/(1+d_v)
    sigma^2 = P_hat(y_u) * (1 - P_hat(y_u)) * sum 1/(1+d_v)^2
    s       = (J_u - E_J) / sigma

where P_hat is the empirical pseudo-label frequency over all M*N records and
d is Euclidean distance between embeddings. High s means the record's
neighborhood disagrees with it more than a random relabeling would, i.e. the
pseudo-label is uncertain. sigma = 0 degenerates to s = 0 (treated as
certain).

Neighbor search is exact: all pairwise distances, ties broken by
(sample_id, pass) ascending. Distances feed 1/(1+d), so results are
invariant to rotations and translations of the embedding space but not to
rescaling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import EnsembleRecordSet
from .errors import ConfigurationError

RecordKey = tuple[int, int]


@dataclass(frozen=True)
class NeighborList:
    """k nearest neighbors of one record, ascending by distance."""

    key: RecordKey
    neighbors: tuple[tuple[RecordKey, float], ...]

    def __post_init__(self):
        dists = [d for _, d in self.neighbors]
        if any(d < 0 for d in dists):
            raise ValueError("negative neighbor distance")
        if any(b < a for a, b in zip(dists, dists[1:])):
            raise ValueError("neighbor distances must be non-decreasing")
        if any(k == self.key for k, _ in self.neighbors):
            raise ValueError("a record cannot neighbor itself")


@dataclass(frozen=True)
class LabelPriors:
    """Relative pseudo-label frequencies over the whole record set."""

    frequencies: np.ndarray

    def __post_init__(self):
        freq = np.asarray(self.frequencies, dtype=np.float64)
        object.__setattr__(self, "frequencies", freq)
        if np.any(freq < 0) or np.any(freq > 1):
            raise ValueError("label frequencies outside [0,1]")
        if abs(freq.sum() - 1.0) > 1e-9:
            raise ValueError(f"label frequencies sum to {freq.sum()}, expected 1")

    def __getitem__(self, label: int) -> float:
        return float(self.frequencies[label])


def label_priors(labels) -> LabelPriors:
    labels = np.asarray(labels, dtype=np.int64)
    counts = np.bincount(labels, minlength=int(labels.max()) + 1)
    return LabelPriors(counts / labels.size)


def knn(record_set: EnsembleRecordSet, k: int):
    """Exact k nearest neighbors per record over all other records.

    Returns (neighbor_idx, neighbor_dist): two (M*N, k) arrays of canonical
    record indices and Euclidean distances, each row ascending by distance
    with exact ties resolved toward the lower (sample_id, pass).
    """
    n = len(record_set)
    if not (1 <= k <= n - 1):
        raise ConfigurationError(f"k={k} must lie in [1, {n - 1}] for {n} records")
    emb = record_set.embeddings.astype(np.float64)
    neighbor_idx = np.empty((n, k), dtype=np.int64)
    neighbor_dist = np.empty((n, k), dtype=np.float64)
    # Direct differences keep identical embeddings at distance exactly 0.
    chunk = max(1, int(4_000_000 // (n * max(record_set.e_dim, 1))))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        diffs = emb[start:stop, None, :] - emb[None, :, :]
        dists = np.sqrt((diffs * diffs).sum(axis=2))
        for row in range(start, stop):
            d = dists[row - start]
            d[row] = np.inf  # exclude self
            order = np.argsort(d, kind="stable")[:k]
            neighbor_idx[row] = order
            neighbor_dist[row] = d[order]
    return neighbor_idx, neighbor_dist


def neighbor_lists(record_set: EnsembleRecordSet, k: int) -> list[NeighborList]:
    """knn() repackaged as per-record NeighborList values."""
    idx, dist = knn(record_set, k)
    keys = list(zip(record_set.sample_ids.tolist(), record_set.passes.tolist()))
    out = []
    for i, key in enumerate(keys):
        out.append(
            NeighborList(key, tuple((keys[j], float(d)) for j, d in zip(idx[i], dist[i])))
        )
    return out


def cut_edge_statistic(y_u: int, neighbors: NeighborList, labels: dict[RecordKey, int]) -> float:
    """Distance-weighted count of disagreeing neighbors."""
    total = 0.0
    for key, dist in neighbors.neighbors:
        if labels[key] != y_u:
            total += 1.0 / (1.0 + dist)
    return total


def null_moments(y_u: int, neighbors: NeighborList, priors: LabelPriors) -> tuple[float, float]:
    """Expectation and standard deviation of the cut-edge statistic under a
    random reshuffling of all pseudo-labels (record u's own label fixed)."""
    p = priors[y_u]
    w1 = sum(1.0 / (1.0 + d) for _, d in neighbors.neighbors)
    w2 = sum(1.0 / (1.0 + d) ** 2 for _, d in neighbors.neighbors)
    e = (1.0 - p) * w1
    var = p * (1.0 - p) * w2
    return e, float(np.sqrt(var))


class UncertaintyReport:
    """Per-record cut-edge statistics over a full record set."""

    def __init__(self, record_set: EnsembleRecordSet, k: int, loo_priors: bool = False):
        self.k = int(k)
        self.loo_priors = bool(loo_priors)
        self.sample_ids = record_set.sample_ids.copy()
        self.passes = record_set.passes.copy()
        self.labels = record_set.labels.copy()
        self.neighbor_idx, self.neighbor_dist = knn(record_set, k)

        n = len(record_set)
        labels64 = self.labels.astype(np.int64)
        counts = np.bincount(labels64, minlength=int(labels64.max()) + 1)
        self.priors = LabelPriors(counts / n)
        if loo_priors:
            # Frequency of y_u among the other n-1 labels.
            p_own = (counts[labels64] - 1) / (n - 1)
        else:
            p_own = counts[labels64] / n

        weights = 1.0 / (1.0 + self.neighbor_dist)
        disagree = labels64[self.neighbor_idx] != labels64[:, None]
        self.j = (weights * disagree).sum(axis=1)
        w1 = weights.sum(axis=1)
        w2 = (weights * weights).sum(axis=1)
        self.e_j = (1.0 - p_own) * w1
        self.sigma_j = np.sqrt(p_own * (1.0 - p_own) * w2)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (self.j - self.e_j) / self.sigma_j
        self.s = np.where(self.sigma_j == 0.0, 0.0, s)

    def __len__(self) -> int:
        return len(self.sample_ids)

    def keys(self) -> list[RecordKey]:
        return list(zip(self.sample_ids.tolist(), self.passes.tolist()))

    def neighbor_list(self, i: int) -> NeighborList:
        keys = self.keys()
        return NeighborList(
            keys[i],
            tuple(
                (keys[j], float(d))
                for j, d in zip(self.neighbor_idx[i], self.neighbor_dist[i])
            ),
        )

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("sample_id,pass,label,J,E,sigma,s\n")
            for i in range(len(self)):
                fh.write(
                    f"{self.sample_ids[i]},{self.passes[i]},{self.labels[i]},"
                    f"{float(self.j[i])!r},{float(self.e_j[i])!r},"
                    f"{float(self.sigma_j[i])!r},{float(self.s[i])!r}\n"
                )


def uncertainty_scores(
    record_set: EnsembleRecordSet, k: int, loo_priors: bool = False
) -> UncertaintyReport:
    """Score every record; larger s means more uncertain."""
    return UncertaintyReport(record_set, k, loo_priors=loo_priors)
