"""
k-means clustering: k-means++ seeding followed by Lloyd iterations.
"""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from app.core.exceptions import InvalidParameters, TooFewSamples
from app.services.learners.base import as_feature_matrix, check_width


@dataclass(frozen=True)
class KMeansModel:
    k: int
    centroids: np.ndarray
    inertia: float
    labels: np.ndarray
    inertia_history: Tuple[float, ...]
    n_iter: int

    @property
    def n_features(self) -> int:
        return int(self.centroids.shape[1])

    @property
    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


def _sq_distances(X: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    return ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def _assign(X: np.ndarray, centroids: np.ndarray) -> Tuple[np.ndarray, float]:
    d2 = _sq_distances(X, centroids)
    # argmin keeps the first minimum, i.e. the lowest cluster id on ties
    labels = np.argmin(d2, axis=1)
    return labels, float(d2[np.arange(X.shape[0]), labels].sum())


def _kmeans_plusplus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            # every point coincides with a centroid already
            idx = int(np.setdiff1d(np.arange(n), chosen)[0])
        chosen.append(idx)
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return X[chosen].copy()


def _lloyd(
    X: np.ndarray, centroids: np.ndarray, max_iters: int
) -> Tuple[np.ndarray, np.ndarray, List[float], int]:
    labels, inertia = _assign(X, centroids)
    history = [inertia]
    n_iter = 0
    for n_iter in range(1, max_iters + 1):
        updated = centroids.copy()
        for j in range(centroids.shape[0]):
            members = labels == j
            # an emptied cluster keeps its previous centroid
            if members.any():
                updated[j] = X[members].mean(axis=0)
        new_labels, inertia = _assign(X, updated)
        centroids = updated
        history.append(inertia)
        converged = np.array_equal(new_labels, labels)
        labels = new_labels
        if converged:
            break
    return centroids, labels, history, n_iter


def kmeans_fit(
    X: np.ndarray, k: int, seed: int, max_iters: int = 300, n_init: int = 10
) -> KMeansModel:
    """Best of `n_init` seeded restarts by final inertia; deterministic given seed."""
    if k < 2:
        raise InvalidParameters(f"k must be >= 2, got {k}")
    if max_iters < 1 or n_init < 1:
        raise InvalidParameters("max_iters and n_init must be >= 1")
    X = as_feature_matrix(X)
    if X.shape[0] < k:
        raise TooFewSamples(f"k-means with k={k} needs at least {k} rows, got {X.shape[0]}")

    best: KMeansModel | None = None
    for child in np.random.SeedSequence(seed).spawn(n_init):
        rng = np.random.default_rng(child)
        centroids, labels, history, n_iter = _lloyd(X, _kmeans_plusplus(X, k, rng), max_iters)
        if best is None or history[-1] < best.inertia:
            best = KMeansModel(
                k=k,
                centroids=centroids,
                inertia=history[-1],
                labels=labels,
                inertia_history=tuple(history),
                n_iter=n_iter,
            )
    assert best is not None
    return best


def kmeans_assign(model: KMeansModel, X: np.ndarray) -> np.ndarray:
    X = check_width(X, model.n_features)
    return _assign(X, model.centroids)[0]
