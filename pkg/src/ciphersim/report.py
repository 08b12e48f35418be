"""Corpus-level orchestration: all-pairs similarity matrices and reports.

Computes every unordered document pair once (disk-cached for resumable
corpus runs), z-normalizes matrices for cross-source comparison,
aggregates sources into one agreement score per pair by geometric mean,
and emits CSV/JSON for external plotting.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baseline import DEFAULT_KMEANS_K, DEFAULT_MINORITY_THRESHOLD, compare_baseline
from .corpus import FeatureSet
from .errors import AlignError, DegenerateError, ParamError
from .graphsim import (
    DEFAULT_K,
    DEFAULT_M_STEPS,
    DEFAULT_PCA_DIM,
    DEFAULT_PER_DOC,
    DEFAULT_RUNS,
    compare_csi,
)

METRICS = ("csi", "baseline", "affinity", "agreement")


@dataclass(frozen=True)
class SimilarityMatrix:
    """Square document-by-document score matrix; NaN marks absent cells."""

    doc_ids: tuple[str, ...]
    values: np.ndarray
    metric: str
    feature_source: str = "external"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ParamError(f"unknown metric {self.metric!r}")
        ids = tuple(self.doc_ids)
        v = np.array(self.values, dtype=np.float64)
        d = len(ids)
        if len(set(ids)) != d:
            raise ParamError("document ids must be distinct")
        if v.shape != (d, d):
            raise ParamError(f"values must be {d}x{d}, got {v.shape}")
        v.flags.writeable = False
        object.__setattr__(self, "doc_ids", ids)
        object.__setattr__(self, "values", v)

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    def cell(self, id_a: str, id_b: str) -> float:
        i, j = self.doc_ids.index(id_a), self.doc_ids.index(id_b)
        return float(self.values[i, j])


def default_params(metric: str) -> dict:
    common = {
        "per_doc": DEFAULT_PER_DOC,
        "runs": DEFAULT_RUNS,
        "seed": 0,
        "pca_dim": DEFAULT_PCA_DIM,
    }
    if metric == "csi":
        return {**common, "k": DEFAULT_K, "m_steps": DEFAULT_M_STEPS, "removal": "betweenness"}
    if metric == "baseline":
        return {
            **common,
            "kmeans_k": DEFAULT_KMEANS_K,
            "minority_threshold": DEFAULT_MINORITY_THRESHOLD,
        }
    raise ParamError(f"no pairwise computation for metric {metric!r}")


def _pair_seed(base_seed: int, id_a: str, id_b: str) -> int:
    h = hashlib.blake2b(digest_size=8)
    h.update(repr((int(base_seed), min(id_a, id_b), max(id_a, id_b))).encode())
    return int.from_bytes(h.digest(), "little")


def _pair_key(fs_a: FeatureSet, fs_b: FeatureSet, metric: str, params: dict) -> str:
    h = hashlib.blake2b(digest_size=16)
    h.update(repr((metric, sorted(params.items()))).encode())
    for fs in (fs_a, fs_b):
        h.update(repr((fs.document_id, fs.feature_source, fs.vectors.shape)).encode())
        h.update(fs.vectors.tobytes())
    return h.hexdigest()


def _compute_pair(fs_a: FeatureSet, fs_b: FeatureSet, metric: str, params: dict) -> dict:
    seed = _pair_seed(params["seed"], fs_a.document_id, fs_b.document_id)
    if metric == "csi":
        cmp = compare_csi(
            fs_a,
            fs_b,
            k=params["k"],
            m_steps=params["m_steps"],
            per_doc=params["per_doc"],
            runs=params["runs"],
            seed=seed,
            pca_dim=params["pca_dim"],
            removal=params["removal"],
        )
        return {
            "value": cmp.mean_csi,
            "per_run": [s.normalized for s in cmp.per_run],
            "entropy_curve": list(cmp.entropy_curve),
        }
    cmp = compare_baseline(
        fs_a,
        fs_b,
        k=params["kmeans_k"],
        minority_threshold=params["minority_threshold"],
        per_doc=params["per_doc"],
        runs=params["runs"],
        seed=seed,
        pca_dim=params["pca_dim"],
    )
    return {"value": cmp.mean_ratio, "per_run": list(cmp.per_run)}


def _split_halves(fs: FeatureSet, seed: int) -> tuple[FeatureSet, FeatureSet]:
    if fs.n < 2:
        raise ParamError("self-comparison needs at least 2 vectors")
    order = np.random.default_rng(seed).permutation(fs.n)
    half = fs.n // 2
    return (
        FeatureSet(fs.document_id + "#a", fs.vectors[np.sort(order[:half])], fs.feature_source),
        FeatureSet(fs.document_id + "#b", fs.vectors[np.sort(order[half : 2 * half])], fs.feature_source),
    )


def all_pairs(
    corpus: list[FeatureSet],
    metric: str = "csi",
    params: dict | None = None,
    cache_dir=None,
    include_diagonal: bool = False,
) -> SimilarityMatrix:
    """Every unordered pair once, mirrored into a symmetric matrix.

    With ``cache_dir`` each pair's result lands in one JSON file keyed by a
    content+param hash, so an interrupted corpus run resumes without
    recomputing. Failed pairs leave NaN cells and a note in params.
    """
    if len(corpus) < 2:
        raise ParamError("need at least 2 documents")
    ids = [fs.document_id for fs in corpus]
    if len(set(ids)) != len(ids):
        raise ParamError("document ids must be distinct")
    merged = default_params(metric)
    unknown = set(params or ()) - set(merged)
    if unknown:
        raise ParamError(f"unknown params for {metric}: {sorted(unknown)}")
    merged.update(params or {})
    for name in ("per_doc", "runs", "k", "m_steps", "kmeans_k"):
        if name in merged and int(merged[name]) < 1:
            raise ParamError(f"{name} must be >= 1, got {merged[name]}")

    d = len(corpus)
    values = np.full((d, d), np.nan)
    failures: dict[str, str] = {}
    cache = Path(cache_dir) if cache_dir is not None else None
    if cache is not None:
        cache.mkdir(parents=True, exist_ok=True)

    def pair_value(fs_a: FeatureSet, fs_b: FeatureSet) -> float:
        # canonical orientation, so document input order cannot matter
        if fs_b.document_id < fs_a.document_id:
            fs_a, fs_b = fs_b, fs_a
        key = _pair_key(fs_a, fs_b, metric, merged)
        if cache is not None:
            hit = cache / f"{key}.json"
            if hit.exists():
                return float(json.loads(hit.read_text())["value"])
        result = _compute_pair(fs_a, fs_b, metric, merged)
        if cache is not None:
            tmp = cache / f"{key}.tmp"
            tmp.write_text(json.dumps(result))
            tmp.replace(cache / f"{key}.json")
        return float(result["value"])

    for i in range(d):
        for j in range(i + 1, d):
            try:
                values[i, j] = values[j, i] = pair_value(corpus[i], corpus[j])
            except (ParamError, DegenerateError) as exc:
                failures[f"{ids[i]}|{ids[j]}"] = str(exc)
        if include_diagonal:
            try:
                half_a, half_b = _split_halves(corpus[i], _pair_seed(merged["seed"], ids[i], ids[i]))
                values[i, i] = pair_value(half_a, half_b)
            except ParamError as exc:
                failures[f"{ids[i]}|{ids[i]}"] = str(exc)

    record = dict(merged)
    if failures:
        record["failures"] = failures
    return SimilarityMatrix(
        doc_ids=tuple(ids),
        values=values,
        metric=metric,
        feature_source=corpus[0].feature_source,
        params=record,
    )


def znormalize(m: SimilarityMatrix) -> SimilarityMatrix:
    """Standardize off-diagonal cells to mean 0, std 1 within this matrix."""
    off = ~np.eye(m.n_docs, dtype=bool)
    present = off & np.isfinite(m.values)
    cells = m.values[present]
    if cells.size < 2:
        raise ParamError("need at least 2 off-diagonal values")
    mu = float(cells.mean())
    sigma = float(cells.std())
    if sigma <= 1e-12 * max(1.0, abs(mu)):
        raise DegenerateError("all off-diagonal values identical, std is 0")
    values = m.values.copy()
    values[present] = (values[present] - mu) / sigma
    return SimilarityMatrix(
        doc_ids=m.doc_ids,
        values=values,
        metric=m.metric,
        feature_source=m.feature_source,
        params={**m.params, "znorm_mu": mu, "znorm_sigma": sigma},
    )


def agreement(matrices: list[SimilarityMatrix]) -> SimilarityMatrix:
    """Cellwise geometric mean across feature sources.

    Sources carrying negative values (z-scores) are shifted up so their
    smallest off-diagonal cell is 0; shifts are recorded. Sources are
    folded in sorted order, so the result is independent of input order.
    """
    if not matrices:
        raise ParamError("need at least one matrix")
    ordered = sorted(matrices, key=lambda m: m.feature_source)
    if len({m.feature_source for m in ordered}) != len(ordered):
        raise ParamError("feature sources must be distinct")
    base = ordered[0]

    stack = []
    shifts = {}
    for m in ordered:
        if set(m.doc_ids) != set(base.doc_ids):
            raise AlignError(
                f"document sets differ: {sorted(base.doc_ids)} vs {sorted(m.doc_ids)}"
            )
        perm = [m.doc_ids.index(i) for i in base.doc_ids]
        v = m.values[np.ix_(perm, perm)].copy()
        off = ~np.eye(len(base.doc_ids), dtype=bool)
        present = off & np.isfinite(v)
        if not present.any():
            raise ParamError(f"matrix {m.feature_source} has no off-diagonal values")
        low = float(v[present].min())
        shift = -low if low < 0 else 0.0
        v += shift
        shifts[m.feature_source] = shift
        stack.append(v)

    q = len(stack)
    with np.errstate(invalid="ignore"):
        agg = np.prod(np.stack(stack), axis=0) ** (1.0 / q)
    return SimilarityMatrix(
        doc_ids=base.doc_ids,
        values=agg,
        metric="agreement",
        feature_source="+".join(m.feature_source for m in ordered),
        params={"sources": [m.feature_source for m in ordered], "shifts": shifts},
    )


def nearest_pairs(m: SimilarityMatrix) -> list[tuple[str, str, float]]:
    """Each document's most similar partner, globally ranked by score.

    Ties, both within a row and across the ranking, break by id order.
    """
    off = ~np.eye(m.n_docs, dtype=bool)
    if not np.isfinite(m.values[off]).all():
        raise ParamError("matrix has absent off-diagonal cells")
    results = []
    for i, doc in enumerate(m.doc_ids):
        candidates = [
            (-float(m.values[i, j]), m.doc_ids[j]) for j in range(m.n_docs) if j != i
        ]
        neg_value, partner = min(candidates)
        results.append((doc, partner, -neg_value))
    results.sort(key=lambda r: (-r[2], r[0]))
    return results


# --- emission ----------------------------------------------------------------

def save_matrix_csv(m: SimilarityMatrix, path) -> None:
    """Doc ids as header row and column; absent cells stay empty."""
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["document", *m.doc_ids])
        for doc, row in zip(m.doc_ids, m.values):
            writer.writerow([doc, *("" if math.isnan(v) else repr(float(v)) for v in row)])


def load_matrix_csv(path, metric: str = "csi", feature_source: str = "external") -> SimilarityMatrix:
    with open(Path(path), newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        ids = tuple(header[1:])
        rows = []
        for line in reader:
            rows.append([float(v) if v else np.nan for v in line[1:]])
    return SimilarityMatrix(
        doc_ids=ids, values=np.array(rows), metric=metric, feature_source=feature_source
    )


def save_matrix_json(m: SimilarityMatrix, path) -> None:
    payload = {
        "doc_ids": list(m.doc_ids),
        "metric": m.metric,
        "feature_source": m.feature_source,
        "params": m.params,
        "values": [[None if math.isnan(v) else v for v in row] for row in m.values],
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def load_matrix_json(path) -> SimilarityMatrix:
    payload = json.loads(Path(path).read_text())
    values = np.array(
        [[np.nan if v is None else v for v in row] for row in payload["values"]]
    )
    return SimilarityMatrix(
        doc_ids=tuple(payload["doc_ids"]),
        values=values,
        metric=payload["metric"],
        feature_source=payload["feature_source"],
        params=payload.get("params", {}),
    )
