import numpy as np
import pytest

from ciphersim.corpus import (
    FeatureSet,
    load_feature_file,
    manifest_path,
    sample_pool,
    save_feature_file,
)
from ciphersim.errors import (
    DataError,
    DimError,
    FormatError,
    SizeError,
    TruncationError,
)


def make_fs(doc_id, n, dim, seed=0, source="external"):
    rng = np.random.default_rng(seed)
    return FeatureSet(doc_id, rng.normal(size=(n, dim)).astype(np.float32), source)


def test_feature_set_casts_to_float32():
    fs = FeatureSet("a", np.ones((2, 3), dtype=np.float64))
    assert fs.vectors.dtype == np.float32
    assert fs.n == 2 and fs.dim == 3


def test_feature_set_rejects_empty_and_nonfinite():
    with pytest.raises(DataError):
        FeatureSet("a", np.empty((0, 3)))
    with pytest.raises(DataError):
        FeatureSet("a", np.array([[1.0, np.nan]]))
    with pytest.raises(DataError):
        FeatureSet("a", np.array([[1e300, 0.0]]))  # overflows float32


def test_load_basic_header(tmp_path):
    path = tmp_path / "doc.cfea"
    fs = FeatureSet("doc", np.arange(6, dtype=np.float32).reshape(2, 3))
    save_feature_file(fs, path)
    loaded = load_feature_file(path)
    assert loaded.n == 2 and loaded.dim == 3
    np.testing.assert_array_equal(loaded.vectors, fs.vectors)
    assert loaded.document_id == "doc"


def test_bad_magic(tmp_path):
    path = tmp_path / "junk.cfea"
    path.write_bytes(b"XXXX" + b"\0" * 12)
    with pytest.raises(FormatError):
        load_feature_file(path)


def test_truncated_payload(tmp_path):
    path = tmp_path / "doc.cfea"
    save_feature_file(make_fs("doc", 4, 5), path)
    raw = path.read_bytes()
    path.write_bytes(raw[:-4])
    with pytest.raises(TruncationError):
        load_feature_file(path)


def test_nonfinite_payload(tmp_path):
    path = tmp_path / "doc.cfea"
    save_feature_file(make_fs("doc", 2, 2), path)
    raw = bytearray(path.read_bytes())
    raw[16:20] = np.array([np.inf], dtype="<f4").tobytes()
    path.write_bytes(bytes(raw))
    with pytest.raises(DataError):
        load_feature_file(path)


@pytest.mark.parametrize("n,dim,seed", [(10, 50, 1), (1, 1, 2), (7, 3, 3)])
def test_round_trip_bit_exact(tmp_path, n, dim, seed):
    # oracle: save -> load must be the identity on the stored matrix
    fs = make_fs("rt", n, dim, seed=seed, source="grid_sift")
    path = tmp_path / "rt.cfea"
    save_feature_file(fs, path)
    loaded = load_feature_file(path)
    assert loaded.vectors.tobytes() == fs.vectors.tobytes()
    assert loaded.feature_source == "grid_sift"


def test_round_trip_single_value(tmp_path):
    fs = FeatureSet("one", np.array([[0.0]], dtype=np.float32))
    path = tmp_path / "one.cfea"
    save_feature_file(fs, path)
    np.testing.assert_array_equal(load_feature_file(path).vectors, fs.vectors)


def test_manifest_sidecar(tmp_path):
    path = tmp_path / "doc.cfea"
    save_feature_file(make_fs("mydoc", 3, 2, source="clip"), path)
    assert manifest_path(path).exists()
    # without the sidecar, identity falls back to the filename
    manifest_path(path).unlink()
    loaded = load_feature_file(path)
    assert loaded.document_id == "doc"
    assert loaded.feature_source == "external"


def test_sample_pool_exhaustive():
    a, b = make_fs("a", 500, 4, 1), make_fs("b", 500, 4, 2)
    pool = sample_pool(a, b, 500, seed=0)
    assert pool.n == 1000
    assert pool.prior == {"a": 500, "b": 500}
    assert pool.balanced
    np.testing.assert_allclose(pool.vectors[:500], a.vectors.astype(np.float64))


def test_sample_pool_determinism():
    a, b = make_fs("a", 600, 8, 1), make_fs("b", 700, 8, 2)
    p1 = sample_pool(a, b, 500, seed=42)
    p2 = sample_pool(a, b, 500, seed=42)
    np.testing.assert_array_equal(p1.vectors, p2.vectors)
    p3 = sample_pool(a, b, 500, seed=43)
    assert not np.array_equal(p1.vectors, p3.vectors)


def test_sample_pool_zodiac_sized():
    # smallest real document in the study has 593 symbols; 500 must fit
    a, b = make_fs("zodiac", 593, 6, 1), make_fs("other", 1140, 6, 2)
    pool = sample_pool(a, b, 500, seed=7)
    assert pool.n == 1000
    assert sum(pool.prior.values()) == pool.n


def test_sample_pool_errors():
    a, b = make_fs("a", 10, 4, 1), make_fs("b", 10, 5, 2)
    with pytest.raises(DimError):
        sample_pool(a, b, 5, seed=0)
    c = make_fs("c", 10, 4, 3)
    with pytest.raises(SizeError):
        sample_pool(a, c, 11, seed=0)
    truncated = sample_pool(a, c, 11, seed=0, allow_truncate=True)
    assert truncated.prior == {"a": 10, "c": 10}
    with pytest.raises(DataError):
        sample_pool(a, make_fs("a", 10, 4, 4), 5, seed=0)


def test_prior_matches_labels_invariant():
    a, b = make_fs("a", 50, 4, 1), make_fs("b", 80, 4, 2)
    for seed in range(5):
        pool = sample_pool(a, b, 30, seed=seed)
        ids, counts = np.unique(pool.labels, return_counts=True)
        assert dict(zip(ids.tolist(), counts.tolist())) == pool.prior
