"""Lloyd's k-means with k-means++ seeding."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class ClusterModel:
    centroids: np.ndarray
    assignment: np.ndarray
    inertia: list = field(default_factory=list)  # objective after each Lloyd iteration

    @property
    def k(self) -> int:
        return len(self.centroids)

    def predict(self, X) -> np.ndarray:
        return _sqdist(np.asarray(X, dtype=np.float64), self.centroids).argmin(axis=1)


def _sqdist(X, C):
    d = (X * X).sum(1)[:, None] - 2.0 * X @ C.T + (C * C).sum(1)[None, :]
    return np.maximum(d, 0.0)


def _plusplus(X, K, rng):
    n = len(X)
    idx = [int(rng.integers(n))]
    d2 = _sqdist(X, X[idx])[:, 0]
    for _ in range(1, K):
        total = d2.sum()
        if total <= 0:
            # remaining points coincide with chosen centers; pick any unused distinct row
            j = int(np.nonzero(d2 == d2.max())[0][0])
        else:
            j = int(rng.choice(n, p=d2 / total))
        idx.append(j)
        d2 = np.minimum(d2, _sqdist(X, X[j:j + 1])[:, 0])
    return X[idx].copy()


def kmeans_fit(table, K: int, seed: int = 0, max_iter: int = 100) -> ClusterModel:
    X = np.asarray(table, dtype=np.float64)
    if K < 1:
        raise ValueError("K must be >= 1")
    distinct = len(np.unique(X, axis=0))
    if K > distinct:
        raise ValueError(f"K={K} exceeds the number of distinct rows ({distinct})")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 5]))
    C = _plusplus(X, K, rng)
    assign = None
    inertia = []
    for _ in range(max_iter):
        D = _sqdist(X, C)
        new = D.argmin(axis=1)
        # re-seed empty clusters from the points farthest from their centers
        dmin = D[np.arange(len(X)), new]
        counts = np.bincount(new, minlength=K)
        for k in np.nonzero(counts == 0)[0]:
            j = int(np.argmax(np.where(counts[new] > 1, dmin, -1.0)))
            counts[new[j]] -= 1
            counts[k] = 1
            new[j] = k
            dmin[j] = -1.0
        for k in range(K):
            C[k] = X[new == k].mean(axis=0)
        inertia.append(float(((X - C[new]) ** 2).sum()))
        if assign is not None and np.array_equal(new, assign):
            break
        assign = new
    return ClusterModel(C, assign, inertia)


def save_assignment(path, assignment) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("node,cluster\n")
        for v, k in enumerate(np.asarray(assignment).tolist()):
            fh.write(f"{v},{k}\n")
