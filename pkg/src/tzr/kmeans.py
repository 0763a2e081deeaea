"""Seeded k-means: k-means++ initialization plus Lloyd iterations.

Fully deterministic for a given (points, k, seed): the RNG is a seeded
numpy Generator and every tie breaks toward the lowest index. Distances and
SSE accumulate in float64.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class KMeansResult:
    """Outcome of one clustering run.

    `sse_history` holds the SSE measured after each Lloyd iteration
    (assignment, empty-cluster repair, centroid update); it is
    non-increasing.
    """

    assignments: np.ndarray  # (n,) int cluster index per point
    centroids: np.ndarray  # (k, d) float64
    sse: float
    sse_history: tuple[float, ...]
    iterations: int


def _pairwise_sq_dists(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("nkd,nkd->nk", diff, diff)


def _plusplus_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    chosen = np.empty(k, dtype=np.intp)
    chosen[0] = rng.integers(n)
    d2 = np.einsum("nd,nd->n", points - points[chosen[0]], points - points[chosen[0]])
    for j in range(1, k):
        total = float(d2.sum())
        if total > 0.0:
            idx = rng.choice(n, p=d2 / total)
        else:
            # All remaining points coincide with a chosen center.
            idx = rng.integers(n)
        chosen[j] = idx
        diff = points - points[idx]
        d2 = np.minimum(d2, np.einsum("nd,nd->n", diff, diff))
    return points[chosen].copy()


def kmeans(
    points,
    k: int,
    seed: int = 42,
    max_iters: int = 100,
    tol: float = 1e-6,
) -> KMeansResult:
    """Cluster points into k groups with seeded k-means++ / Lloyd.

    Iterates until the relative SSE improvement drops below `tol` or
    `max_iters` is reached. Points tied between centroids go to the lowest
    centroid index; a cluster left empty is re-seeded with the point
    farthest from its assigned centroid.

    Args:
        points: (n, d) array-like, n >= 1.
        k: number of clusters, 1 <= k <= n.

    Raises:
        ValueError: empty point set, or k out of range.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    n = pts.shape[0]
    if n == 0:
        raise ValueError("empty point set")
    if not (1 <= k <= n):
        raise ValueError(f"k={k} out of range for {n} points")

    rng = np.random.default_rng(seed)
    centroids = _plusplus_init(pts, k, rng)

    history: list[float] = []
    assignments = np.zeros(n, dtype=np.intp)
    prev_sse = None
    iterations = 0
    for _ in range(max_iters):
        iterations += 1
        d2 = _pairwise_sq_dists(pts, centroids)
        assignments = np.argmin(d2, axis=1)  # argmin takes the lowest index on ties

        # Repair empty clusters: hand each one the point currently farthest
        # from its own centroid (lowest point index on ties). Stealing a
        # singleton's member can empty another cluster, so loop until clean;
        # repaired points are not pickable again within this iteration.
        point_d2 = d2[np.arange(n), assignments]
        while True:
            counts = np.bincount(assignments, minlength=k)
            empties = np.flatnonzero(counts == 0)
            if empties.size == 0:
                break
            far = int(np.argmax(point_d2))
            assignments[far] = empties[0]
            point_d2[far] = -1.0

        for c in range(k):
            centroids[c] = pts[assignments == c].mean(axis=0)

        diff = pts - centroids[assignments]
        sse = float(np.einsum("nd,nd->n", diff, diff).sum())
        history.append(sse)
        if sse == 0.0:  # fixed point; iterating again only adds fp noise
            break
        if prev_sse is not None and (prev_sse - sse) / prev_sse < tol:
            break
        prev_sse = sse

    return KMeansResult(
        assignments=assignments,
        centroids=centroids,
        sse=history[-1],
        sse_history=tuple(history),
        iterations=iterations,
    )
