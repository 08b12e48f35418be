"""ciphersim: unsupervised similarity analysis of handwritten cipher alphabets.

Segments symbols from page images, extracts grid-gradient descriptors, and
scores how separable two documents' symbol sets are — via the mutual-kNN /
Girvan-Newman entropy index and a k-means mixed-cluster baseline.
"""

__version__ = "0.1.0"

from .corpus import Document, FeatureSet, PooledSample, load_feature_file, sample_pool, save_feature_file
from .graphsim import (
    CsiScore,
    MutualKnnGraph,
    PartitionTrace,
    build_mutual_knn,
    cluster_entropy,
    compare_csi,
    csi,
    girvan_newman_trace,
    global_entropy,
    prior_entropy,
)
from .baseline import compare_baseline, kmeans, mixed_cluster_ratio
from .descriptor import GridDescriptorParams, PcaModel, grid_descriptor, pca_fit, pca_transform
from .segment import (
    LineBand,
    SegmentParams,
    SymbolImage,
    connected_components,
    detect_lines,
    merge_close,
    sauvola_binarize,
    segment_page,
)
from .synth import SynthSpec, ground_truth, make_corpus, make_corpus_detailed, render_page
from .affinity import (
    AffinityTable,
    affinity_table,
    second_choice_histogram,
    train_symbol_classifier,
)
from .report import (
    SimilarityMatrix,
    agreement,
    all_pairs,
    nearest_pairs,
    save_matrix_csv,
    save_matrix_json,
    znormalize,
)

__all__ = [
    "Document",
    "FeatureSet",
    "PooledSample",
    "load_feature_file",
    "save_feature_file",
    "sample_pool",
    "MutualKnnGraph",
    "PartitionTrace",
    "CsiScore",
    "build_mutual_knn",
    "girvan_newman_trace",
    "cluster_entropy",
    "global_entropy",
    "prior_entropy",
    "csi",
    "compare_csi",
    "kmeans",
    "mixed_cluster_ratio",
    "compare_baseline",
    "GridDescriptorParams",
    "PcaModel",
    "grid_descriptor",
    "pca_fit",
    "pca_transform",
    "LineBand",
    "SegmentParams",
    "SymbolImage",
    "sauvola_binarize",
    "detect_lines",
    "connected_components",
    "merge_close",
    "segment_page",
    "SynthSpec",
    "make_corpus",
    "make_corpus_detailed",
    "ground_truth",
    "render_page",
    "AffinityTable",
    "train_symbol_classifier",
    "second_choice_histogram",
    "affinity_table",
    "SimilarityMatrix",
    "all_pairs",
    "znormalize",
    "agreement",
    "nearest_pairs",
    "save_matrix_csv",
    "save_matrix_json",
]
