"""k-means mixed-cluster baseline for pairwise alphabet similarity.

Pooled symbols are clustered with k-means; the fraction of clusters whose
minority document exceeds a threshold is the similarity score. Lloyd's
algorithm is implemented directly so each iteration's inertia can be
checked against the non-increase invariant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import FeatureSet, PooledSample, sample_pool
from .errors import ParamError
from .graphsim import DEFAULT_PCA_DIM, DEFAULT_PER_DOC, DEFAULT_RUNS, _maybe_reduce

DEFAULT_KMEANS_K = 60
DEFAULT_MINORITY_THRESHOLD = 0.1


@dataclass(frozen=True)
class KMeansResult:
    centroids: np.ndarray
    assignment: np.ndarray
    inertia: float
    inertia_history: np.ndarray   # inertia after every assignment step
    n_iter: int


@dataclass(frozen=True)
class BaselineComparison:
    doc_a: str
    doc_b: str
    feature_source: str
    per_run: list[float]
    params: dict = field(default_factory=dict)

    @property
    def mean_ratio(self) -> float:
        return float(np.mean(self.per_run))


def _sq_dists(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    d2 = ((x[:, None, :] - c[None, :, :]) ** 2).sum(axis=2)
    return np.maximum(d2, 0.0)


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]))
    centroids[0] = x[rng.integers(n)]
    closest = ((x - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total <= 0:
            centroids[j] = x[rng.integers(n)]
        else:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(closest), r))
            centroids[j] = x[min(idx, n - 1)]
        closest = np.minimum(closest, ((x - centroids[j]) ** 2).sum(axis=1))
    return centroids


def kmeans(
    pool, k: int, seed: int = 0, max_iter: int = 100, tol: float = 1e-6
) -> KMeansResult:
    """Lloyd's k-means with k-means++ seeding; deterministic given seed.

    Empty clusters are re-seeded to the point farthest from its assigned
    centroid. Stops when the largest centroid shift drops below ``tol``.
    """
    x = pool.vectors if isinstance(pool, PooledSample) else np.asarray(pool, dtype=np.float64)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ParamError(f"k must be in [1, {n}], got {k}")
    if max_iter < 1:
        raise ParamError("max_iter must be >= 1")

    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp_init(x, k, rng)
    history = []
    assignment = np.zeros(n, np.int64)
    for it in range(max_iter):
        d2 = _sq_dists(x, centroids)
        assignment = d2.argmin(axis=1)
        point_d2 = d2[np.arange(n), assignment]
        for j in np.flatnonzero(np.bincount(assignment, minlength=k) == 0):
            far = int(point_d2.argmax())
            centroids[j] = x[far]
            assignment[far] = j
            point_d2[far] = 0.0
        history.append(float(point_d2.sum()))
        new_centroids = centroids.copy()
        for j in range(k):
            members = assignment == j
            if members.any():
                new_centroids[j] = x[members].mean(axis=0)
        shift = np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max()
        centroids = new_centroids
        if shift < tol:
            break

    d2 = _sq_dists(x, centroids)
    assignment = d2.argmin(axis=1)
    inertia = float(d2[np.arange(n), assignment].sum())
    history.append(inertia)
    return KMeansResult(
        centroids=centroids,
        assignment=assignment,
        inertia=inertia,
        inertia_history=np.array(history),
        n_iter=it + 1,
    )


def mixed_cluster_ratio(
    assignment: np.ndarray,
    labels: np.ndarray,
    minority_threshold: float = DEFAULT_MINORITY_THRESHOLD,
) -> float:
    """Fraction of non-empty clusters whose minority-document share exceeds
    the threshold. At threshold 0 this is exactly "contains more than one
    document"."""
    if not 0 <= minority_threshold < 0.5:
        raise ParamError("minority_threshold must be in [0, 0.5)")
    assignment = np.asarray(assignment)
    labels = np.asarray(labels)
    if assignment.shape[0] != labels.shape[0]:
        raise ParamError("assignment does not cover all labels")
    _, label_codes = np.unique(labels, return_inverse=True)
    _, cluster_codes = np.unique(assignment, return_inverse=True)
    table = np.zeros((cluster_codes.max() + 1, label_codes.max() + 1), np.int64)
    np.add.at(table, (cluster_codes, label_codes), 1)
    sizes = table.sum(axis=1)
    minority_frac = 1.0 - table.max(axis=1) / sizes
    return float((minority_frac > minority_threshold).mean())


def compare_baseline(
    a: FeatureSet,
    b: FeatureSet,
    k: int = DEFAULT_KMEANS_K,
    per_doc: int = DEFAULT_PER_DOC,
    runs: int = DEFAULT_RUNS,
    seed: int = 0,
    minority_threshold: float = DEFAULT_MINORITY_THRESHOLD,
    pca_dim: int | None = DEFAULT_PCA_DIM,
    max_iter: int = 100,
    tol: float = 1e-6,
    allow_truncate: bool = False,
) -> BaselineComparison:
    """Multi-run baseline protocol: sample, reduce, cluster, score, average."""
    if runs < 1:
        raise ParamError("runs must be >= 1")
    run_seeds = np.random.SeedSequence(seed).spawn(runs)
    per_run = []
    for ss in run_seeds:
        pool = sample_pool(a, b, per_doc, seed=ss, allow_truncate=allow_truncate)
        pool = _maybe_reduce(pool, pca_dim)
        km = kmeans(pool, k, seed=ss.spawn(1)[0], max_iter=max_iter, tol=tol)
        per_run.append(mixed_cluster_ratio(km.assignment, pool.labels, minority_threshold))
    source = a.feature_source if a.feature_source == b.feature_source else "external"
    return BaselineComparison(
        doc_a=a.document_id,
        doc_b=b.document_id,
        feature_source=source,
        per_run=per_run,
        params={
            "kmeans_k": k,
            "per_doc": per_doc,
            "runs": runs,
            "seed": seed,
            "minority_threshold": minority_threshold,
            "pca_dim": pca_dim,
        },
    )
