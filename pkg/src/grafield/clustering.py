"""Community detection in the Karhunen-Loeve coordinate space.

The partitioning recipe: take the top ``k - 1`` nontrivial vertex-basis
columns for the chosen operator family (smoothed when a flattening
constant is given), treat each row as a point, and run restarted k-means.
Restart ``r`` draws from a generator seeded with ``(seed, r)`` and the
winner is the lexicographically smallest ``(wcss, r)``, so results do not
depend on execution order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .errors import GraphValidationError
from .graphs import Graph, _freeze
from .spectral import kl_decomposition, pagerank_spectrum


@dataclass(frozen=True)
class ClusterResult:
    """Cluster ids in 1..k with the WCSS of the winning restart."""

    labels: np.ndarray
    wcss: float
    seed: int
    restarts: int
    k: int


def _kmeans_plusplus(points, k, rng):
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            # all remaining mass at already-chosen centers; any point works
            centers[j] = points[rng.integers(n)]
        else:
            centers[j] = points[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((points - centers[j]) ** 2, axis=1))
    return centers


def _lloyd(points, centers, max_iter):
    n, k = points.shape[0], centers.shape[0]
    labels = np.zeros(n, dtype=np.intp)
    for _ in range(max_iter):
        dist = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_labels = dist.argmin(axis=1)
        for j in range(k):
            mask = new_labels == j
            if np.any(mask):
                centers[j] = points[mask].mean(axis=0)
            else:
                # revive an empty cluster at the worst-fit point
                worst = int(np.argmax(dist[np.arange(n), new_labels]))
                centers[j] = points[worst]
                new_labels[worst] = j
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    dist = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = dist.argmin(axis=1)
    wcss = float(dist[np.arange(n), labels].sum())
    return labels, wcss


def kmeans(points, k, seed=0, restarts=50, max_iter=100):
    """Restarted Lloyd iterations with distance-squared seeding.

    Returns ``(labels, wcss)`` of the best restart; labels are 0-based.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in 1..{n}")
    best = None
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        centers = _kmeans_plusplus(points, k, rng)
        labels, wcss = _lloyd(points, centers, max_iter)
        if best is None or wcss < best[0]:
            best = (wcss, labels)
    return best[1], best[0]


def spectral_cluster(
    g: Graph,
    k: int,
    operator: str = "laplacian",
    tau=0.5,
    seed: int = 20240601,
    restarts: int = 50,
    alpha: float = 0.85,
    embed_dim: int | None = None,
    row_normalize: bool = False,
) -> ClusterResult:
    """Partition the vertices of ``g`` into ``k`` communities.

    The embedding has ``k - 1`` columns unless ``embed_dim`` overrides it,
    and rows are used as-is (``row_normalize=True`` switches to the
    spherical variant).  With the unsmoothed operator an isolated vertex
    is an error; the regularized operators handle any graph.
    """
    if k < 2:
        raise ValueError("need at least two clusters")
    if k > g.n:
        raise ValueError(f"k={k} exceeds the vertex count {g.n}")
    dim = (k - 1) if embed_dim is None else embed_dim
    dim = min(dim, g.n - 1)
    if operator == "pagerank":
        _, vecs = pagerank_spectrum(g, alpha=alpha, m=dim)
        points = vecs
    else:
        dec = kl_decomposition(g, operator=operator, tau=tau, m=dim)
        points = dec.phi
    if row_normalize:
        norms = np.linalg.norm(points, axis=1)
        norms[norms == 0] = 1.0
        points = points / norms[:, None]
    labels, wcss = kmeans(points, k, seed=seed, restarts=restarts)
    return ClusterResult(
        labels=_freeze(labels + 1), wcss=wcss, seed=seed, restarts=restarts, k=k
    )


def misclassification(predicted, truth) -> float:
    """Smallest disagreement fraction over bijections of class ids.

    Solved as an optimal assignment on the confusion matrix, so arbitrary
    (and unequal) label alphabets on either side are fine.
    """
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise GraphValidationError("label vectors differ in length")
    pred_ids, pred_codes = np.unique(predicted, return_inverse=True)
    true_ids, true_codes = np.unique(truth, return_inverse=True)
    confusion = np.zeros((pred_ids.size, true_ids.size))
    np.add.at(confusion, (pred_codes, true_codes), 1)
    rows, cols = scipy.optimize.linear_sum_assignment(confusion, maximize=True)
    agreed = confusion[rows, cols].sum()
    return float(1.0 - agreed / predicted.size)


def choose_k_spectral_gap(eigenvalues) -> int:
    """Pick the cluster count at the largest consecutive spectral gap.

    ``eigenvalues`` must be ordered as produced by the solver (decreasing
    magnitude).  The answer is ``argmax_j |lambda_j - lambda_{j+1}| + 1``
    with 1-based ``j``; ties break toward the smaller count.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size < 2:
        raise ValueError("need at least two eigenvalues to see a gap")
    gaps = np.abs(np.diff(lam))
    return int(np.argmax(gaps)) + 2


def algebraic_connectivity(eigenvalues) -> float:
    """``1 - lambda_1``: near zero when the graph is (almost) disconnected."""
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size < 1:
        raise ValueError("empty spectrum")
    return float(1.0 - lam[0])
