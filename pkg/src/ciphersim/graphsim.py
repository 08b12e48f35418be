"""Mutual-kNN graph partitioning and the Cipher Similarity Index.

The similarity of two symbol alphabets is read off the entropy decay of an
iterative graph partitioning: pooled symbol features become nodes of a
mutual-kNN graph, edges are removed one at a time by highest exact
edge-betweenness centrality (Girvan-Newman), and after every split the
label entropy of the partition is recorded. Documents whose symbols mingle
keep the entropy high for many splits; the area under that curve,
normalized by the prior label entropy, is the similarity index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .corpus import FeatureSet, PooledSample, sample_pool
from .descriptor import pca_fit, pca_transform
from .errors import InputError, ParamError

DEFAULT_K = 10
DEFAULT_M_STEPS = 50
DEFAULT_PER_DOC = 500
DEFAULT_RUNS = 4
DEFAULT_PCA_DIM = 50

# Edges whose betweenness is within this relative slack of the maximum are
# treated as tied and broken lexicographically; keeps the removal order
# deterministic in the face of float summation noise.
_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class MutualKnnGraph:
    """Undirected graph over pooled symbols; edge (u,v) iff u and v are
    mutually among each other's k nearest neighbors."""

    n_nodes: int
    edges: np.ndarray        # (m, 2) int64, u < v, lexicographically sorted
    weights: np.ndarray      # (m,) float64 Euclidean distances
    labels: np.ndarray       # per-node document id
    k: int

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]


@dataclass(frozen=True)
class PartitionTrace:
    """Per-iteration cluster assignments and global entropies (nats).

    ``assignments[0]`` is the untouched graph's connected components;
    each subsequent recorded entry has exactly one more cluster, except the
    all-singleton padding appended when the graph runs out of edges early.
    """

    assignments: list[np.ndarray]
    entropies: np.ndarray
    n_initial_clusters: int
    removal_order: list[tuple[int, int]]
    padded_from: int | None = None   # index of the first padding entry, if any

    @property
    def m_steps(self) -> int:
        return len(self.entropies) - 1


@dataclass(frozen=True)
class CsiScore:
    raw_auc: float
    normalized: float
    h_prior: float
    m_steps: int


@dataclass(frozen=True)
class CsiComparison:
    """Result of the multi-run CSI protocol for one document pair."""

    doc_a: str
    doc_b: str
    feature_source: str
    per_run: list[CsiScore]
    entropy_curve: np.ndarray        # mean over runs, length m_steps + 1
    params: dict = field(default_factory=dict)

    @property
    def mean_csi(self) -> float:
        return float(np.mean([s.normalized for s in self.per_run]))


def build_mutual_knn(pool: PooledSample, k: int) -> MutualKnnGraph:
    """Exact Euclidean mutual-kNN graph; distance ties break toward the
    smaller row index."""
    n = pool.n
    if k < 1:
        raise ParamError("k must be >= 1")
    if k >= n:
        raise ParamError(f"k={k} must be < number of pooled rows ({n})")

    x = pool.vectors
    sq = np.einsum("ij,ij->i", x, x)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, np.inf)
    # stable sort on distance keeps equal-distance neighbors in index order
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]

    in_knn = np.zeros((n, n), dtype=bool)
    rows = np.repeat(np.arange(n), k)
    in_knn[rows, order.ravel()] = True
    mutual = in_knn & in_knn.T
    iu, iv = np.nonzero(np.triu(mutual, 1))
    edges = np.column_stack([iu, iv]).astype(np.int64)
    weights = np.sqrt(d2[iu, iv])
    return MutualKnnGraph(n_nodes=n, edges=edges, weights=weights, labels=pool.labels, k=k)


def cluster_entropy(label_counts) -> float:
    """Shannon entropy (nats) of one cluster's per-document counts."""
    counts = [c for c in label_counts.values()] if isinstance(label_counts, dict) else list(label_counts)
    if any(c < 0 for c in counts):
        raise InputError("negative label count")
    total = sum(counts)
    if total == 0:
        raise InputError("cluster has no samples")
    h = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            h -= p * math.log(p)
    return h


def global_entropy(assignment: np.ndarray, labels: np.ndarray) -> float:
    """Cluster-size-weighted average entropy of a whole partition."""
    assignment = np.asarray(assignment)
    n = assignment.shape[0]
    if n != len(labels):
        raise InputError("assignment does not cover all labels")
    _, label_codes = np.unique(labels, return_inverse=True)
    n_docs = label_codes.max() + 1
    _, cluster_codes = np.unique(assignment, return_inverse=True)
    n_clusters = cluster_codes.max() + 1
    table = np.zeros((n_clusters, n_docs), dtype=np.int64)
    np.add.at(table, (cluster_codes, label_codes), 1)
    total = 0.0
    for row in table:
        size = row.sum()
        total += size / n * cluster_entropy(row)
    return total


def prior_entropy(pool: PooledSample) -> float:
    """Entropy of the pooled label distribution; the CSI normalizer."""
    return cluster_entropy(list(pool.prior.values()))


# --- exact edge betweenness (Brandes) over a CSR adjacency -----------------

@njit(cache=True)
def _brandes_edge_betweenness(n, indptr, indices, edge_ids, bet):
    bet[:] = 0.0
    dist = np.empty(n, np.int64)
    sigma = np.empty(n, np.float64)
    delta = np.empty(n, np.float64)
    queue = np.empty(n, np.int64)
    visit = np.empty(n, np.int64)
    for s in range(n):
        dist[:] = -1
        sigma[:] = 0.0
        delta[:] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        qh = 0
        qt = 1
        queue[0] = s
        nv = 0
        while qh < qt:
            v = queue[qh]
            qh += 1
            visit[nv] = v
            nv += 1
            for ii in range(indptr[v], indptr[v + 1]):
                w = indices[ii]
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue[qt] = w
                    qt += 1
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
        # accumulate dependencies in reverse BFS order
        for ip in range(nv - 1, -1, -1):
            w = visit[ip]
            for ii in range(indptr[w], indptr[w + 1]):
                v = indices[ii]
                if dist[v] == dist[w] - 1:
                    c = sigma[v] / sigma[w] * (1.0 + delta[w])
                    bet[edge_ids[ii]] += c
                    delta[v] += c
    # each undirected pair (s,t) was counted from both endpoints
    for e in range(bet.shape[0]):
        bet[e] *= 0.5


def _build_csr(n: int, edges: np.ndarray):
    m = edges.shape[0]
    if m == 0:
        return np.zeros(n + 1, np.int64), np.empty(0, np.int64), np.empty(0, np.int64)
    u, v = edges[:, 0], edges[:, 1]
    deg = np.bincount(u, minlength=n) + np.bincount(v, minlength=n)
    indptr = np.zeros(n + 1, np.int64)
    np.cumsum(deg, out=indptr[1:])
    heads = np.concatenate([u, v])
    tails = np.concatenate([v, u])
    eids = np.concatenate([np.arange(m), np.arange(m)])
    order = np.argsort(heads, kind="stable")
    indices = tails[order]
    edge_ids = eids[order]
    return indptr, indices, edge_ids


@njit(cache=True)
def _components(n, indptr, indices):
    comp = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int64)
    c = 0
    for s in range(n):
        if comp[s] >= 0:
            continue
        comp[s] = c
        qh = 0
        qt = 1
        queue[0] = s
        while qh < qt:
            v = queue[qh]
            qh += 1
            for ii in range(indptr[v], indptr[v + 1]):
                w = indices[ii]
                if comp[w] < 0:
                    comp[w] = c
                    queue[qt] = w
                    qt += 1
        c += 1
    return comp, c


def edge_betweenness(n_nodes: int, edges: np.ndarray) -> np.ndarray:
    """Exact betweenness centrality of every edge (unweighted shortest paths)."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    indptr, indices, edge_ids = _build_csr(n_nodes, edges)
    bet = np.zeros(edges.shape[0], np.float64)
    if edges.shape[0]:
        _brandes_edge_betweenness(n_nodes, indptr, indices, edge_ids, bet)
    return bet


def _select_edge(edges: np.ndarray, scores: np.ndarray) -> int:
    """Index of the highest-scoring edge; near-ties break lexicographically."""
    top = scores.max()
    tied = np.flatnonzero(scores >= top - _TIE_RTOL * max(1.0, abs(top)))
    best = tied[0]
    for j in tied[1:]:
        if (edges[j, 0], edges[j, 1]) < (edges[best, 0], edges[best, 1]):
            best = j
    return int(best)


def girvan_newman_trace(
    g: MutualKnnGraph, m_steps: int, removal: str = "betweenness"
) -> PartitionTrace:
    """Iteratively remove edges until the component count has grown by
    ``m_steps``, recording the partition and its global entropy at every
    increment.

    ``removal`` selects the edge to delete: exact highest betweenness
    (recomputed after every removal) or, with ``"longest-edge"``, the
    largest distance weight. If the graph runs out of edges first, the
    remaining steps are padded with the all-singleton partition (entropy 0).
    """
    if m_steps < 1:
        raise ParamError("m_steps must be >= 1")
    if removal not in ("betweenness", "longest-edge"):
        raise ParamError(f"unknown removal mode {removal!r}")

    n = g.n_nodes
    edges = g.edges.copy()
    weights = g.weights.copy()

    indptr, indices, _ = _build_csr(n, edges)
    comp, n_comp = _components(n, indptr, indices)
    n_initial = n_comp

    assignments = [comp]
    entropies = [global_entropy(comp, g.labels)]
    removal_order: list[tuple[int, int]] = []
    padded_from = None

    while len(assignments) <= m_steps:
        if edges.shape[0] == 0:
            if padded_from is None:
                padded_from = len(assignments)
            singleton = np.arange(n, dtype=np.int64)
            assignments.append(singleton)
            entropies.append(0.0)
            continue
        if removal == "betweenness":
            scores = edge_betweenness(n, edges)
        else:
            scores = weights
        drop = _select_edge(edges, scores)
        removal_order.append((int(edges[drop, 0]), int(edges[drop, 1])))
        edges = np.delete(edges, drop, axis=0)
        weights = np.delete(weights, drop)
        indptr, indices, _ = _build_csr(n, edges)
        comp, c = _components(n, indptr, indices)
        if c > n_comp:
            n_comp = c
            assignments.append(comp)
            entropies.append(global_entropy(comp, g.labels))

    return PartitionTrace(
        assignments=assignments,
        entropies=np.array(entropies),
        n_initial_clusters=n_initial,
        removal_order=removal_order,
        padded_from=padded_from,
    )


def csi(trace: PartitionTrace, h_prior: float) -> CsiScore:
    """Trapezoidal area under the entropy curve, normalized to [0, 1]."""
    if h_prior <= 0:
        raise ParamError("h_prior must be > 0")
    if len(trace.entropies) < 2:
        raise ParamError("trace must contain at least one partitioning step")
    m = trace.m_steps
    raw = float(np.trapezoid(trace.entropies))
    return CsiScore(raw_auc=raw, normalized=raw / (m * h_prior), h_prior=h_prior, m_steps=m)


def _maybe_reduce(pool: PooledSample, pca_dim: int | None) -> PooledSample:
    if pca_dim is None or pool.dim <= pca_dim:
        return pool
    model = pca_fit(pool.vectors, pca_dim)
    reduced = pca_transform(model, pool.vectors)
    return PooledSample(
        vectors=reduced, labels=pool.labels, prior=pool.prior, balanced=pool.balanced
    )


def compare_csi(
    a: FeatureSet,
    b: FeatureSet,
    k: int = DEFAULT_K,
    m_steps: int = DEFAULT_M_STEPS,
    per_doc: int = DEFAULT_PER_DOC,
    runs: int = DEFAULT_RUNS,
    seed: int = 0,
    pca_dim: int | None = DEFAULT_PCA_DIM,
    removal: str = "betweenness",
    allow_truncate: bool = False,
) -> CsiComparison:
    """Full CSI protocol: per run, sample a balanced pool, reduce with PCA
    (fit per pair, skipped when the features are already narrower), build
    the mutual-kNN graph, trace Girvan-Newman and integrate the entropy
    curve. Deterministic given the seed."""
    if runs < 1:
        raise ParamError("runs must be >= 1")
    run_seeds = np.random.SeedSequence(seed).spawn(runs)
    per_run = []
    curves = []
    for ss in run_seeds:
        pool = sample_pool(a, b, per_doc, seed=ss, allow_truncate=allow_truncate)
        pool = _maybe_reduce(pool, pca_dim)
        graph = build_mutual_knn(pool, k)
        trace = girvan_newman_trace(graph, m_steps, removal=removal)
        score = csi(trace, prior_entropy(pool))
        per_run.append(score)
        curves.append(trace.entropies)
    source = a.feature_source if a.feature_source == b.feature_source else "external"
    return CsiComparison(
        doc_a=a.document_id,
        doc_b=b.document_id,
        feature_source=source,
        per_run=per_run,
        entropy_curve=np.mean(curves, axis=0),
        params={
            "k": k,
            "m_steps": m_steps,
            "per_doc": per_doc,
            "runs": runs,
            "seed": seed,
            "pca_dim": pca_dim,
            "removal": removal,
        },
    )
