"""End-to-end walk: rendered pages -> symbols -> descriptors -> CSI.

Renders two fake manuscript pages whose glyph inventories half-overlap,
segments each page back into symbol crops, turns every crop into a dense
gradient-grid descriptor, and compares the two descriptor sets. The
pipeline is exactly what you would run on scanned pages, minus the
scanning.
"""

import numpy as np

from ciphersim.corpus import FeatureSet
from ciphersim.descriptor import grid_descriptor
from ciphersim.graphsim import compare_csi
from ciphersim.segment import segment_page
from ciphersim.synth import make_polyline_glyphs, render_page

N_GLYPHS = 10   # distinct symbols per page
SHARED = 5      # symbols the two pages have in common
REPEATS = 4     # instances of each symbol on its page


def page_features(page, doc_id):
    """Segment a page and stack one descriptor per found symbol."""
    symbols = segment_page(page)
    vectors = np.stack([grid_descriptor(s.crop) for s in symbols])
    print(f"{doc_id}: {len(symbols)} symbols -> {vectors.shape[1]}-dim descriptors")
    return FeatureSet(doc_id, vectors, feature_source="grid_sift")


def main():
    rng = np.random.default_rng(7)
    # one shared pool of shapes; page A uses the first N, page B the last N,
    # overlapping in the middle by SHARED
    shapes = make_polyline_glyphs(2 * N_GLYPHS - SHARED, rng, size=32)
    ids_a = list(range(N_GLYPHS)) * REPEATS
    ids_b = list(range(N_GLYPHS - SHARED, len(shapes))) * REPEATS
    page_a = render_page(shapes, ids_a, per_line=10, rng=np.random.default_rng(1))
    page_b = render_page(shapes, ids_b, per_line=10, rng=np.random.default_rng(2))

    a = page_features(page_a, "page-a")
    b = page_features(page_b, "page-b")

    result = compare_csi(a, b, k=5, m_steps=12, per_doc=30, runs=2, pca_dim=20, seed=0)
    print(f"\nmean CSI over {len(result.per_run)} runs: {result.mean_csi:.3f}")
    print("per-run:", [round(s.normalized, 3) for s in result.per_run])
    print("\nHalf-shared inventories land between the all-shared (~1)")
    print("and disjoint (~0) extremes.")


if __name__ == "__main__":
    main()
