"""Independent brute-force reimplementations used as test oracles.

Everything here recomputes results from first principles with per-record
loops and plain tuple sorting, deliberately sharing no code with the package
internals it checks.
"""

import math
from collections import Counter

import numpy as np


def oracle_neighbors(keys, embeddings, k):
    """All-pairs nearest neighbors: sort (distance, sample_id, pass) tuples."""
    n = len(keys)
    emb = np.asarray(embeddings, dtype=np.float64)
    out = []
    for u in range(n):
        cand = []
        for v in range(n):
            if v == u:
                continue
            d = math.sqrt(float(((emb[u] - emb[v]) ** 2).sum()))
            cand.append((d, keys[v][0], keys[v][1], v))
        cand.sort(key=lambda t: (t[0], t[1], t[2]))
        out.append([(c[3], c[0]) for c in cand[:k]])
    return out


def oracle_report(keys, embeddings, labels, k, loo=False):
    """Cut-edge J, null moments, and s for every record, from scratch."""
    n = len(keys)
    labels = [int(x) for x in labels]
    neighbor_sets = oracle_neighbors(keys, embeddings, k)
    counts = Counter(labels)
    rows = []
    for u in range(n):
        if loo:
            p = (counts[labels[u]] - 1) / (n - 1)
        else:
            p = counts[labels[u]] / n
        j = 0.0
        w1 = 0.0
        w2 = 0.0
        for v, d in neighbor_sets[u]:
            w = 1.0 / (1.0 + d)
            w1 += w
            w2 += w * w
            if labels[v] != labels[u]:
                j += w
        e = (1.0 - p) * w1
        sigma = math.sqrt(p * (1.0 - p) * w2)
        s = 0.0 if sigma == 0.0 else (j - e) / sigma
        rows.append({"J": j, "E": e, "sigma": sigma, "s": s})
    return rows, neighbor_sets


def oracle_retained(keys, s_values, fraction):
    """Survivors after removing ceil(fraction*n) highest-s records."""
    n = len(keys)
    n_remove = math.ceil(fraction * n)
    ranked = sorted(range(n), key=lambda i: (s_values[i], keys[i][0], keys[i][1]))
    return {keys[i] for i in ranked[: n - n_remove]}


def oracle_vote(labels):
    """(kind, value): strict plurality, tie, or empty."""
    if not labels:
        return ("empty", None)
    counts = Counter(labels)
    best = max(counts.values())
    leaders = sorted(lab for lab, c in counts.items() if c == best)
    if len(leaders) == 1:
        return ("decided", leaders[0])
    return ("tie", tuple(leaders))


def oracle_edit(keys, embeddings, labels, k, fraction, fallback):
    """The full edit pipeline: uncertainty, filter, vote, fallback.

    fallback maps sample_id to the label a dropout-free pass would produce.
    Returns {sample_id: (label, provenance, votes_kept)}.
    """
    rows, _ = oracle_report(keys, embeddings, labels, k)
    retained = oracle_retained(keys, [r["s"] for r in rows], fraction)
    per_sample = {}
    for key, lab in zip(keys, labels):
        per_sample.setdefault(key[0], [])
        if key in retained:
            per_sample[key[0]].append(int(lab))
    out = {}
    for sid, votes in per_sample.items():
        kind, value = oracle_vote(votes)
        if kind == "decided":
            out[sid] = (value, "vote", len(votes))
        else:
            out[sid] = (fallback[sid], "fallback", len(votes))
    return out


def oracle_nearest_mean(features, gold, means):
    """Nearest-class-mean classification accuracy."""
    hits = 0
    for x, g in zip(features, gold):
        dists = [float(((np.asarray(x, dtype=np.float64) - m) ** 2).sum()) for m in means]
        hits += int(min(range(len(means)), key=lambda c: dists[c]) == g)
    return hits / len(gold)


def oracle_shuffled_j_mean(rng, neighbor_idx, neighbor_dist, labels, y_u, n_shuffles):
    """Monte-Carlo E[J_u] under relabeling: the full label multiset is
    redistributed over all records while u keeps its reference label.

    Returns (mean, standard error of the mean).
    """
    labels = np.asarray(labels)
    n = labels.size
    weights = 1.0 / (1.0 + np.asarray(neighbor_dist, dtype=np.float64))
    # Random permutations via argsort of uniform draws.
    draws = rng.random((n_shuffles, n))
    perms = np.argsort(draws, axis=1)
    shuffled = labels[perms]  # (n_shuffles, n)
    neigh_labels = shuffled[:, np.asarray(neighbor_idx)]  # (n_shuffles, k)
    j = ((neigh_labels != y_u) * weights).sum(axis=1)
    return float(j.mean()), float(j.std(ddof=1) / math.sqrt(n_shuffles))
