"""Second-choice affinity between documents.

A linear softmax classifier learns to name the source document of each
symbol. For a test document the classifier's runner-up votes, counted
over all test symbols and normalized, form one row of an affinity table:
documents whose symbols keep coming in second are the similar ones.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import FeatureSet
from .errors import DimError, ParamError

DEFAULT_EPOCHS = 300
DEFAULT_LEARNING_RATE = 0.5
DEFAULT_L2 = 1e-4


@dataclass(frozen=True)
class SymbolClassifier:
    """Softmax model over document classes, fit on standardized features."""

    class_ids: tuple[str, ...]     # lexicographic; column order everywhere
    mean: np.ndarray
    std: np.ndarray
    weights: np.ndarray            # n_classes x dim
    bias: np.ndarray
    train_accuracy: float

    @property
    def dim(self) -> int:
        return self.weights.shape[1]


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def train_symbol_classifier(
    training: list[FeatureSet],
    seed: int = 0,
    epochs: int = DEFAULT_EPOCHS,
    learning_rate: float = DEFAULT_LEARNING_RATE,
    l2: float = DEFAULT_L2,
) -> SymbolClassifier:
    """Fit the document-id classifier by full-batch gradient descent.

    Classes are ordered by document id, so the model is independent of the
    order training sets are passed in.
    """
    if len(training) < 2:
        raise ParamError("need at least 2 training documents")
    ids = sorted(fs.document_id for fs in training)
    if len(set(ids)) != len(ids):
        raise ParamError("training document ids must be distinct")
    dims = {fs.dim for fs in training}
    if len(dims) != 1:
        raise DimError(f"training dims differ: {sorted(dims)}")
    if epochs < 1 or learning_rate <= 0 or l2 < 0:
        raise ParamError("epochs >= 1, learning_rate > 0, l2 >= 0 required")

    by_id = {fs.document_id: fs for fs in training}
    x = np.concatenate([by_id[i].vectors.astype(np.float64) for i in ids])
    y = np.concatenate([np.full(by_id[i].n, c) for c, i in enumerate(ids)])
    n, dim = x.shape
    n_classes = len(ids)

    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    xs = (x - mean) / std

    rng = np.random.default_rng(seed)
    w = rng.normal(0.0, 0.01, size=(n_classes, dim))
    b = np.zeros(n_classes)
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0

    for _ in range(epochs):
        probs = _softmax(xs @ w.T + b)
        err = probs - onehot
        grad_w = err.T @ xs / n + l2 * w
        grad_b = err.sum(axis=0) / n
        w -= learning_rate * grad_w
        b -= learning_rate * grad_b

    predicted = (xs @ w.T + b).argmax(axis=1)
    return SymbolClassifier(
        class_ids=tuple(ids),
        mean=mean,
        std=std,
        weights=w,
        bias=b,
        train_accuracy=float((predicted == y).mean()),
    )


def class_scores(model: SymbolClassifier, vectors: np.ndarray) -> np.ndarray:
    """Per-class logits for raw (unstandardized) feature rows."""
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.dim:
        raise DimError(f"expected (n, {model.dim}) vectors, got {x.shape}")
    xs = (x - model.mean) / model.std
    return xs @ model.weights.T + model.bias


def predict(model: SymbolClassifier, vectors: np.ndarray) -> list[str]:
    return [model.class_ids[i] for i in class_scores(model, vectors).argmax(axis=1)]


def rank2_histogram(scores: np.ndarray) -> np.ndarray:
    """Normalized count of each class at rank 2, per score row.

    Depends only on score order within a row, so any strictly increasing
    transform of the scores leaves it unchanged. Rank-2 ties go to the
    smaller class index.
    """
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[1] < 2:
        raise ParamError("scores must be (n, C) with C >= 2")
    n, c = scores.shape
    idx = np.arange(c)
    counts = np.zeros(c)
    for row in scores:
        order = np.lexsort((idx, -row))
        counts[order[1]] += 1.0
    return counts / n


def second_choice_histogram(model: SymbolClassifier, test: FeatureSet) -> np.ndarray:
    """One affinity-table row: runner-up frequency per training document."""
    return rank2_histogram(class_scores(model, test.vectors))


@dataclass(frozen=True)
class AffinityTable:
    """Second-choice frequencies; rows test documents, columns classes."""

    rows: tuple[str, ...]
    cols: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (len(self.rows), len(self.cols)):
            raise DimError(f"values shape {v.shape} does not match labels")
        if v.size and ((v < 0).any() or (v > 1).any()):
            raise ParamError("affinity values must lie in [0, 1]")
        if v.size and np.abs(v.sum(axis=1) - 1.0).max() > 1e-9:
            raise ParamError("each affinity row must sum to 1")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


def affinity_table(model: SymbolClassifier, tests: list[FeatureSet]) -> AffinityTable:
    if not tests:
        raise ParamError("need at least one test document")
    rows = [second_choice_histogram(model, fs) for fs in tests]
    return AffinityTable(
        rows=tuple(fs.document_id for fs in tests),
        cols=model.class_ids,
        values=np.vstack(rows),
    )


def save_affinity_csv(table: AffinityTable, path) -> None:
    """Header row of class ids, one labeled row per test document."""
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["document", *table.cols])
        for rid, row in zip(table.rows, table.values):
            writer.writerow([rid, *(repr(float(v)) for v in row)])


def load_affinity_csv(path) -> AffinityTable:
    with open(Path(path), newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows, values = [], []
        for line in reader:
            rows.append(line[0])
            values.append([float(v) for v in line[1:]])
    return AffinityTable(rows=tuple(rows), cols=tuple(header[1:]), values=np.array(values))
