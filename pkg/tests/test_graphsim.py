import math

import numpy as np
import pytest

from ciphersim.corpus import PooledSample
from ciphersim.errors import InputError, ParamError
from ciphersim.graphsim import (
    CsiScore,
    MutualKnnGraph,
    PartitionTrace,
    build_mutual_knn,
    cluster_entropy,
    csi,
    edge_betweenness,
    girvan_newman_trace,
    global_entropy,
    prior_entropy,
)


def pool_from(points, labels):
    points = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels)
    ids, counts = np.unique(labels, return_counts=True)
    return PooledSample(
        vectors=points,
        labels=labels,
        prior=dict(zip(ids.tolist(), counts.tolist())),
        balanced=len(set(counts.tolist())) == 1,
    )


def graph_from_edges(n, edges, labels=None):
    edges = np.array(sorted(tuple(sorted(e)) for e in edges), dtype=np.int64).reshape(-1, 2)
    if labels is None:
        labels = np.array(["x"] * n)
    return MutualKnnGraph(
        n_nodes=n,
        edges=edges,
        weights=np.ones(len(edges)),
        labels=np.asarray(labels),
        k=0,
    )


from oracles import brute_force_mutual_knn, oracle_edge_betweenness, oracle_removal_sequence


# --- mutual kNN ------------------------------------------------------------

def test_mutual_knn_1d_pairs():
    pool = pool_from([[0.0], [1.0], [10.0], [11.0]], ["a", "a", "b", "b"])
    g = build_mutual_knn(pool, k=1)
    assert {tuple(e) for e in g.edges} == {(0, 1), (2, 3)}
    np.testing.assert_allclose(g.weights, [1.0, 1.0])


def test_mutual_knn_identical_points():
    pool = pool_from([[1.0, 2.0], [1.0, 2.0], [50.0, 50.0]], ["a", "a", "b"])
    g = build_mutual_knn(pool, k=1)
    assert {tuple(e) for e in g.edges} == {(0, 1)}


def test_mutual_knn_complete_graph():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(7, 3))
    pool = pool_from(pts, ["a"] * 4 + ["b"] * 3)
    g = build_mutual_knn(pool, k=6)
    assert g.n_edges == 7 * 6 // 2


def test_mutual_knn_k_too_large():
    pool = pool_from([[0.0], [1.0]], ["a", "b"])
    with pytest.raises(ParamError):
        build_mutual_knn(pool, k=2)


@pytest.mark.parametrize("seed", range(20))
def test_mutual_knn_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(10, 80))
    dim = int(rng.integers(1, 6))
    k = int(rng.integers(1, min(10, n - 1) + 1))
    pts = rng.normal(size=(n, dim))
    # duplicated points exercise the tie-break
    if n > 4:
        pts[1] = pts[0]
        pts[3] = pts[2]
    pool = pool_from(pts, ["a"] * (n // 2) + ["b"] * (n - n // 2))
    g = build_mutual_knn(pool, k)
    assert {tuple(e) for e in g.edges} == brute_force_mutual_knn(pts.tolist(), k)


def test_mutual_knn_subset_of_directed_knn():
    rng = np.random.default_rng(11)
    pts = rng.normal(size=(120, 4))
    pool = pool_from(pts, ["a"] * 60 + ["b"] * 60)
    g = build_mutual_knn(pool, k=5)
    directed = set()
    for u in range(120):
        d = np.linalg.norm(pts - pts[u], axis=1)
        d[u] = np.inf
        for v in np.argsort(d, kind="stable")[:5]:
            directed.add((min(u, v), max(u, v)))
    assert {tuple(e) for e in g.edges} <= directed


# --- entropy ---------------------------------------------------------------

def test_cluster_entropy_closed_forms():
    assert cluster_entropy({"A": 4}) == 0.0
    assert cluster_entropy({"A": 2, "B": 2}) == pytest.approx(math.log(2), abs=1e-12)
    expected = -(0.75 * math.log(0.75) + 0.25 * math.log(0.25))
    assert cluster_entropy({"A": 3, "B": 1}) == pytest.approx(expected, abs=1e-12)
    assert cluster_entropy({"A": 3, "B": 1}) == pytest.approx(0.562335, abs=1e-6)


def test_cluster_entropy_rejects_empty():
    with pytest.raises(InputError):
        cluster_entropy({"A": 0, "B": 0})


def test_global_entropy_weighted_average():
    assignment = np.array([0, 0, 0, 0, 1, 1, 1, 1])
    labels = np.array(["A", "A", "B", "B", "A", "A", "A", "A"])
    expected = (4 * math.log(2) + 4 * 0.0) / 8
    assert global_entropy(assignment, labels) == pytest.approx(expected, abs=1e-12)
    assert global_entropy(assignment, labels) == pytest.approx(0.346574, abs=1e-6)


def test_global_entropy_pure_and_single():
    labels = np.array(["A", "A", "B", "B"])
    assert global_entropy(np.array([0, 0, 1, 1]), labels) == 0.0
    assert global_entropy(np.zeros(4), labels) == pytest.approx(math.log(2), abs=1e-12)


# --- betweenness and the removal loop --------------------------------------

def test_bridge_removed_first():
    # two triangles joined by one bridge: the bridge carries all cross pairs
    edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]
    g = graph_from_edges(6, edges, labels=["a", "a", "a", "b", "b", "b"])
    bet = oracle_edge_betweenness(6, edges)
    assert max(bet, key=bet.get) == (2, 3)
    trace = girvan_newman_trace(g, m_steps=1)
    assert trace.removal_order[0] == (2, 3)
    assert trace.n_initial_clusters == 1
    assert len(np.unique(trace.assignments[1])) == 2
    # the split separates the labels exactly -> entropy drops to zero
    assert trace.entropies[0] == pytest.approx(math.log(2))
    assert trace.entropies[1] == 0.0


def test_path_tie_breaks_lexicographically():
    g = graph_from_edges(3, [(0, 1), (1, 2)])
    trace = girvan_newman_trace(g, m_steps=1)
    # both edges carry betweenness 2 (hand enumeration: 0-1, 1-2, 0-1-2)
    bet = oracle_edge_betweenness(3, [(0, 1), (1, 2)])
    assert bet[(0, 1)] == bet[(1, 2)] == 2
    assert trace.removal_order[0] == (0, 1)


def test_edgeless_graph_trace():
    g = graph_from_edges(5, [])
    trace = girvan_newman_trace(g, m_steps=3)
    assert trace.n_initial_clusters == 5
    np.testing.assert_array_equal(trace.entropies, np.zeros(4))
    for a in trace.assignments:
        assert len(np.unique(a)) == 5


@pytest.mark.parametrize("seed", range(50))
def test_removal_order_matches_oracle(seed):
    rng = np.random.default_rng(1000 + seed)
    n = int(rng.integers(4, 13))
    p = float(rng.uniform(0.25, 0.7))
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    if not edges:
        edges = [(0, 1)]
    g = graph_from_edges(n, edges)
    trace = girvan_newman_trace(g, m_steps=n + len(edges))
    assert trace.removal_order == oracle_removal_sequence(n, edges)


def test_betweenness_values_match_oracle():
    rng = np.random.default_rng(5)
    for _ in range(10):
        n = int(rng.integers(4, 12))
        edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.5]
        if not edges:
            continue
        arr = np.array(sorted(edges), dtype=np.int64)
        got = edge_betweenness(n, arr)
        want = oracle_edge_betweenness(n, edges)
        for e, b in zip(arr, got):
            assert b == pytest.approx(float(want[tuple(e)]), abs=1e-9)


def test_cluster_count_increments_by_one():
    rng = np.random.default_rng(9)
    pts = rng.normal(size=(40, 3))
    pool = pool_from(pts, ["a"] * 20 + ["b"] * 20)
    g = build_mutual_knn(pool, k=4)
    trace = girvan_newman_trace(g, m_steps=10)
    counts = [len(np.unique(a)) for a in trace.assignments]
    end = trace.padded_from or len(counts)
    for i in range(1, end):
        assert counts[i] == counts[i - 1] + 1
    h_prior = prior_entropy(pool)
    assert all(h <= h_prior + 1e-12 for h in trace.entropies)


# --- CSI -------------------------------------------------------------------

def trace_with_entropies(values):
    n = 4
    return PartitionTrace(
        assignments=[np.zeros(n, np.int64)] * len(values),
        entropies=np.asarray(values, dtype=np.float64),
        n_initial_clusters=1,
        removal_order=[],
    )


def test_csi_anchors():
    h = math.log(2)
    m = 10
    assert csi(trace_with_entropies([0.0] * (m + 1)), h).normalized == 0.0
    assert csi(trace_with_entropies([h] * (m + 1)), h).normalized == pytest.approx(1.0, abs=1e-12)
    decay = [h * (1 - i / m) for i in range(m + 1)]
    assert csi(trace_with_entropies(decay), h).normalized == pytest.approx(0.5, abs=1e-9)


def test_csi_raw_auc_is_trapezoid():
    values = [0.6, 0.4, 0.1]
    # hand trapezoid: (0.6+0.4)/2 + (0.4+0.1)/2 = 0.75
    score = csi(trace_with_entropies(values), 0.7)
    assert score.raw_auc == pytest.approx(0.75, abs=1e-12)
    assert score.normalized == pytest.approx(0.75 / (2 * 0.7), abs=1e-12)


def test_csi_rejects_bad_prior():
    with pytest.raises(ParamError):
        csi(trace_with_entropies([0.1, 0.1]), 0.0)


def test_prior_entropy_balanced():
    pool = pool_from(np.zeros((4, 2)), ["a", "a", "b", "b"])
    assert prior_entropy(pool) == pytest.approx(math.log(2), abs=1e-12)
