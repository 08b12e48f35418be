"""Document/feature data model, CFEA feature-file I/O and balanced pooling.

CFEA binary layout (little-endian throughout):

    bytes 0-3    magic ``CFEA``
    bytes 4-7    format version, u32 (currently 1)
    bytes 8-11   N, number of rows, u32
    bytes 12-15  dim, row width, u32
    then         N*dim float32 values, row-major

A sidecar ``<name>.json`` manifest next to the binary records
``document_id``, ``feature_source`` and a ``created`` ISO-8601 timestamp.

Vectors are held as float32 (the storage precision); analysis code promotes
to float64 when pooling.
"""

from __future__ import annotations

import datetime
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, DimError, FormatError, IoError, SizeError, TruncationError

MAGIC = b"CFEA"
VERSION = 1

FEATURE_SOURCES = (
    "grid_sift",
    "vgg16",
    "clip",
    "ocr_generic",
    "ocr_handwritten",
    "synthetic",
    "external",
)


@dataclass(frozen=True)
class Document:
    """Identity of one source manuscript's symbol set."""

    id: str
    display_name: str = ""
    source_path: Path | None = None

    def __post_init__(self):
        if not self.id:
            raise DataError("document id must be non-empty")
        if not self.display_name:
            object.__setattr__(self, "display_name", self.id)


@dataclass(frozen=True)
class FeatureSet:
    """Per-symbol feature vectors of one document.

    ``vectors`` is an N x dim float32 matrix, N >= 1, all values finite.
    """

    document_id: str
    vectors: np.ndarray
    feature_source: str = "external"

    def __post_init__(self):
        with np.errstate(over="ignore"):
            v = np.asarray(self.vectors).astype(np.float32)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise DataError(
                f"feature matrix must be 2-D with N >= 1, dim >= 1, got shape {v.shape}"
            )
        if not np.isfinite(v).all():
            raise DataError("feature matrix contains non-finite values")
        if self.feature_source not in FEATURE_SOURCES:
            raise DataError(f"unknown feature_source {self.feature_source!r}")
        v.flags.writeable = False
        object.__setattr__(self, "vectors", v)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class PooledSample:
    """Rows pooled from two documents, with per-row labels and the prior counts."""

    vectors: np.ndarray            # float64, (n_a + n_b) x dim
    labels: np.ndarray             # per-row document id (unicode array)
    prior: dict[str, int] = field(default_factory=dict)
    balanced: bool = False

    def __post_init__(self):
        v = np.ascontiguousarray(self.vectors, dtype=np.float64)
        labels = np.asarray(self.labels)
        if v.shape[0] != labels.shape[0]:
            raise DataError("labels must match vectors row for row")
        ids, counts = np.unique(labels, return_counts=True)
        realized = dict(zip(ids.tolist(), counts.tolist()))
        if realized != dict(self.prior):
            raise DataError(f"prior {self.prior} does not match labels {realized}")
        if self.balanced and len(set(self.prior.values())) > 1:
            raise DataError("balanced pool has unequal per-document counts")
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "prior", dict(self.prior))

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def manifest_path(path) -> Path:
    return Path(path).with_suffix(".json")


def save_feature_file(fs: FeatureSet, path) -> None:
    """Write ``fs`` as a CFEA binary plus its JSON manifest.

    Round-trips bit-exactly through :func:`load_feature_file`.
    """
    path = Path(path)
    n, dim = fs.vectors.shape
    header = MAGIC + struct.pack("<III", VERSION, n, dim)
    payload = np.ascontiguousarray(fs.vectors, dtype="<f4").tobytes()
    manifest = {
        "document_id": fs.document_id,
        "feature_source": fs.feature_source,
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    try:
        path.write_bytes(header + payload)
        manifest_path(path).write_text(json.dumps(manifest, indent=2) + "\n")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e


def load_feature_file(path) -> FeatureSet:
    """Read a CFEA binary (and its manifest, when present) into a FeatureSet."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e
    if len(raw) < 16 or raw[:4] != MAGIC:
        raise FormatError(f"{path}: not a CFEA file (bad magic)")
    version, n, dim = struct.unpack("<III", raw[4:16])
    if version != VERSION:
        raise FormatError(f"{path}: unsupported CFEA version {version}")
    expected = 16 + 4 * n * dim
    if len(raw) != expected:
        raise TruncationError(
            f"{path}: header declares {n}x{dim} ({expected} bytes), file has {len(raw)}"
        )
    vectors = np.frombuffer(raw, dtype="<f4", offset=16).reshape(n, dim)
    if not np.isfinite(vectors).all():
        raise DataError(f"{path}: payload contains non-finite values")

    document_id = path.stem
    feature_source = "external"
    mpath = manifest_path(path)
    if mpath.exists():
        meta = json.loads(mpath.read_text())
        document_id = meta.get("document_id", document_id)
        feature_source = meta.get("feature_source", feature_source)
    return FeatureSet(document_id=document_id, vectors=vectors, feature_source=feature_source)


def sample_pool(
    a: FeatureSet,
    b: FeatureSet,
    per_doc: int,
    seed: int,
    allow_truncate: bool = False,
) -> PooledSample:
    """Pool ``per_doc`` rows sampled without replacement from each document.

    Deterministic given (a, b, per_doc, seed). With ``allow_truncate`` a
    document shorter than ``per_doc`` contributes all of its rows instead of
    raising SizeError (the pool is then no longer balanced).
    """
    if a.dim != b.dim:
        raise DimError(f"dim mismatch: {a.dim} vs {b.dim}")
    if a.document_id == b.document_id:
        raise DataError(
            f"both feature sets carry document id {a.document_id!r}; "
            "give self-comparison halves distinct ids"
        )
    if per_doc < 1:
        raise SizeError("per_doc must be >= 1")
    take_a, take_b = per_doc, per_doc
    if per_doc > min(a.n, b.n):
        if not allow_truncate:
            raise SizeError(
                f"per_doc={per_doc} exceeds available rows ({a.document_id}:{a.n}, "
                f"{b.document_id}:{b.n})"
            )
        take_a, take_b = min(per_doc, a.n), min(per_doc, b.n)

    rng = np.random.default_rng(seed)
    idx_a = np.sort(rng.choice(a.n, size=take_a, replace=False))
    idx_b = np.sort(rng.choice(b.n, size=take_b, replace=False))
    vectors = np.vstack(
        [a.vectors[idx_a].astype(np.float64), b.vectors[idx_b].astype(np.float64)]
    )
    labels = np.array([a.document_id] * take_a + [b.document_id] * take_b)
    prior = {a.document_id: take_a, b.document_id: take_b}
    return PooledSample(
        vectors=vectors, labels=labels, prior=prior, balanced=(take_a == take_b)
    )
