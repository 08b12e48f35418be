import numpy as np
import pytest

from ciphersim.affinity import (
    AffinityTable,
    affinity_table,
    class_scores,
    load_affinity_csv,
    predict,
    rank2_histogram,
    save_affinity_csv,
    second_choice_histogram,
    train_symbol_classifier,
)
from ciphersim.corpus import FeatureSet
from ciphersim.errors import DimError, ParamError


def gaussian_doc(doc_id, center, n, spread, rng, dim=None):
    center = np.asarray(center, dtype=np.float64)
    dim = dim or center.shape[0]
    x = center + spread * rng.standard_normal((n, dim))
    return FeatureSet(doc_id, x, feature_source="synthetic")


def test_separated_gaussians_high_heldout_accuracy():
    rng = np.random.default_rng(0)
    train_a = gaussian_doc("doc-a", [0.0] * 8, 200, 0.5, rng)
    train_b = gaussian_doc("doc-b", [10.0] * 8, 200, 0.5, rng)
    test_a = gaussian_doc("doc-a", [0.0] * 8, 200, 0.5, rng)
    test_b = gaussian_doc("doc-b", [10.0] * 8, 200, 0.5, rng)
    model = train_symbol_classifier([train_a, train_b], seed=0)
    assert model.train_accuracy > 0.95
    hits = predict(model, test_a.vectors).count("doc-a")
    hits += predict(model, test_b.vectors).count("doc-b")
    assert hits / 400 > 0.95


def test_identical_distributions_accuracy_near_half():
    rng = np.random.default_rng(1)
    a = gaussian_doc("doc-a", [0.0, 0.0], 1000, 1.0, rng)
    b = gaussian_doc("doc-b", [0.0, 0.0], 1000, 1.0, rng)
    model = train_symbol_classifier([a, b], seed=0)
    assert abs(model.train_accuracy - 0.5) <= 0.05


def test_single_sample_per_class_trains():
    a = FeatureSet("doc-a", [[0.0, 1.0]], feature_source="synthetic")
    b = FeatureSet("doc-b", [[1.0, 0.0]], feature_source="synthetic")
    model = train_symbol_classifier([a, b], seed=0)
    assert model.train_accuracy == 1.0
    row = second_choice_histogram(model, a)
    assert row.shape == (2,)
    assert abs(row.sum() - 1.0) < 1e-12


def test_training_validation_errors():
    rng = np.random.default_rng(2)
    a = gaussian_doc("doc-a", [0.0, 0.0], 10, 1.0, rng)
    b = gaussian_doc("doc-b", [1.0, 1.0], 10, 1.0, rng)
    b3 = gaussian_doc("doc-c", [1.0, 1.0, 1.0], 10, 1.0, rng)
    with pytest.raises(ParamError):
        train_symbol_classifier([a])
    with pytest.raises(ParamError):
        train_symbol_classifier([a, gaussian_doc("doc-a", [1, 1], 5, 1.0, rng)])
    with pytest.raises(DimError):
        train_symbol_classifier([a, b3])
    with pytest.raises(ParamError):
        train_symbol_classifier([a, b], epochs=0)
    model = train_symbol_classifier([a, b])
    with pytest.raises(DimError):
        class_scores(model, rng.standard_normal((5, 3)))


def test_deterministic_given_seed():
    rng = np.random.default_rng(3)
    a = gaussian_doc("doc-a", [0.0, 0.0], 50, 1.0, rng)
    b = gaussian_doc("doc-b", [3.0, 3.0], 50, 1.0, rng)
    m1 = train_symbol_classifier([a, b], seed=7)
    m2 = train_symbol_classifier([a, b], seed=7)
    assert np.array_equal(m1.weights, m2.weights)
    assert np.array_equal(m1.bias, m2.bias)


def test_order_permutation_leaves_model_unchanged():
    rng = np.random.default_rng(4)
    docs = [
        gaussian_doc("doc-a", [0.0, 0.0], 40, 0.5, rng),
        gaussian_doc("doc-b", [4.0, 0.0], 40, 0.5, rng),
        gaussian_doc("doc-c", [0.0, 4.0], 40, 0.5, rng),
    ]
    m1 = train_symbol_classifier(docs, seed=0)
    m2 = train_symbol_classifier(docs[::-1], seed=0)
    assert m1.class_ids == m2.class_ids
    assert np.array_equal(m1.weights, m2.weights)
    test = gaussian_doc("doc-t", [2.0, 2.0], 30, 0.5, rng)
    assert np.array_equal(
        second_choice_histogram(m1, test), second_choice_histogram(m2, test)
    )


# --- rank-2 counting ---------------------------------------------------------

def test_rank2_histogram_basic():
    scores = np.array(
        [
            [3.0, 2.0, 1.0],   # rank 2 -> class 1
            [1.0, 3.0, 2.0],   # rank 2 -> class 2
            [9.0, 0.0, 5.0],   # rank 2 -> class 2
            [0.0, 1.0, 9.0],   # rank 2 -> class 1
        ]
    )
    assert np.allclose(rank2_histogram(scores), [0.0, 0.5, 0.5])


def test_rank2_ties_go_to_smaller_class_index():
    scores = np.array([[5.0, 2.0, 2.0]])
    assert np.array_equal(rank2_histogram(scores), [0.0, 1.0, 0.0])
    # tie at rank 1: classes 0,1 tie; rank 1 -> 0, rank 2 -> 1
    scores = np.array([[4.0, 4.0, 0.0]])
    assert np.array_equal(rank2_histogram(scores), [0.0, 1.0, 0.0])


def test_rank2_invariant_under_monotone_transforms():
    rng = np.random.default_rng(5)
    scores = rng.standard_normal((200, 6))
    base = rank2_histogram(scores)
    assert np.array_equal(base, rank2_histogram(3.0 * scores + 11.0))
    assert np.array_equal(base, rank2_histogram(scores**3))


def test_rank2_rejects_single_column():
    with pytest.raises(ParamError):
        rank2_histogram(np.ones((4, 1)))


def test_three_class_geometry_far_class_gets_little_mass():
    rng = np.random.default_rng(6)
    a = gaussian_doc("doc-a", [50.0, 50.0], 300, 0.3, rng)
    b = gaussian_doc("doc-b", [0.0, 0.0], 300, 0.3, rng)
    c = gaussian_doc("doc-c", [4.0, 0.0], 300, 0.3, rng)
    model = train_symbol_classifier([a, b, c], seed=0)
    midpoint = gaussian_doc("doc-m", [2.0, 0.0], 500, 0.3, rng)
    row = second_choice_histogram(model, midpoint)
    names = dict(zip(model.class_ids, row))
    assert abs(row.sum() - 1.0) < 1e-9
    assert names["doc-a"] < 0.1
    assert names["doc-b"] + names["doc-c"] > 0.9


# --- table and CSV -----------------------------------------------------------

def test_affinity_table_row_sums_and_range():
    rng = np.random.default_rng(7)
    docs = [
        gaussian_doc("doc-a", [0.0, 0.0], 60, 1.0, rng),
        gaussian_doc("doc-b", [2.0, 0.0], 60, 1.0, rng),
        gaussian_doc("doc-c", [0.0, 2.0], 60, 1.0, rng),
    ]
    model = train_symbol_classifier(docs, seed=1)
    tests = [gaussian_doc(f"doc-t{i}", rng.uniform(-1, 3, 2), 40, 1.0, rng) for i in range(4)]
    table = affinity_table(model, tests)
    assert table.rows == ("doc-t0", "doc-t1", "doc-t2", "doc-t3")
    assert table.cols == ("doc-a", "doc-b", "doc-c")
    assert np.abs(table.values.sum(axis=1) - 1.0).max() <= 1e-9
    assert table.values.min() >= 0.0 and table.values.max() <= 1.0


def test_affinity_table_validation():
    with pytest.raises(ParamError):
        AffinityTable(rows=("r",), cols=("a", "b"), values=np.array([[0.4, 0.4]]))
    with pytest.raises(ParamError):
        AffinityTable(rows=("r",), cols=("a", "b"), values=np.array([[1.2, -0.2]]))
    with pytest.raises(DimError):
        AffinityTable(rows=("r",), cols=("a", "b"), values=np.ones((2, 2)) / 2)


def test_affinity_csv_round_trip(tmp_path):
    table = AffinityTable(
        rows=("doc-x", "doc-y"),
        cols=("doc-a", "doc-b", "doc-c"),
        values=np.array([[0.25, 0.5, 0.25], [0.0, 0.344, 0.656]]),
    )
    path = tmp_path / "affinity.csv"
    save_affinity_csv(table, path)
    back = load_affinity_csv(path)
    assert back.rows == table.rows
    assert back.cols == table.cols
    assert np.array_equal(back.values, table.values)
    header = path.read_text().splitlines()[0]
    assert header == "document,doc-a,doc-b,doc-c"
