"""Command-line front end.

Subcommands cover the full pipeline: ``segment`` pages into symbol crops,
``features`` turns crops into feature files, ``compare`` scores one
document pair, ``matrix`` runs a whole corpus, ``agree`` folds matrices
across feature sources, ``affinity`` runs the second-choice protocol and
``synth`` builds ground-truth corpora. Exit codes: 0 success, 2 parameter
error, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from .affinity import affinity_table, save_affinity_csv, train_symbol_classifier
from .baseline import DEFAULT_KMEANS_K, compare_baseline
from .corpus import load_feature_file, save_feature_file, FeatureSet
from .descriptor import GridDescriptorParams, grid_descriptor, pca_fit, pca_transform
from .errors import CipherSimError, DataError, ParamError
from .graphsim import (
    DEFAULT_K,
    DEFAULT_M_STEPS,
    DEFAULT_PER_DOC,
    DEFAULT_RUNS,
    DEFAULT_PCA_DIM,
    compare_csi,
)
from .report import (
    agreement,
    all_pairs,
    load_matrix_json,
    nearest_pairs,
    save_matrix_csv,
    save_matrix_json,
)
from .segment import SegmentParams, load_crop, load_gray, save_crop, segment_page
from .synth import SynthSpec, ground_truth, make_corpus_detailed, make_polyline_glyphs, render_page


def _add_protocol_flags(p, metric_choice=True):
    if metric_choice:
        p.add_argument("--metric", choices=("csi", "baseline"), default="csi")
    p.add_argument("--k", type=int, default=DEFAULT_K, help="mutual-kNN neighbor count")
    p.add_argument("--msteps", type=int, default=DEFAULT_M_STEPS, help="split iterations")
    p.add_argument("--kmeans-k", type=int, default=DEFAULT_KMEANS_K)
    p.add_argument("--per-doc", type=int, default=DEFAULT_PER_DOC)
    p.add_argument("--runs", type=int, default=DEFAULT_RUNS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--pca", type=int, default=DEFAULT_PCA_DIM, help="pooled PCA dim, 0 disables"
    )


def cmd_segment(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    params = SegmentParams(
        window=args.window,
        k=args.k,
        R=args.R,
        invert=args.invert,
        rel_threshold=args.rel_threshold,
        min_dist=args.min_dist,
        merge_gap=args.merge_gap,
    )
    index = []
    for page_path in args.pages:
        page_path = Path(page_path)
        symbols = segment_page(load_gray(page_path), params)
        for serial, sym in enumerate(symbols):
            name = f"{page_path.stem}_l{sym.line_index:02d}_s{serial:04d}.png"
            save_crop(sym, out / name)
            index.append(
                {
                    "page": page_path.name,
                    "line": sym.line_index,
                    "bbox": list(sym.bbox),
                    "file": name,
                }
            )
    (out / "index.json").write_text(json.dumps(index, indent=2) + "\n")
    print(f"wrote {len(index)} symbols from {len(args.pages)} pages to {out}")
    return 0


def cmd_features(args) -> int:
    crops = Path(args.crops)
    index_path = crops / "index.json"
    if not index_path.exists():
        raise DataError(f"no index.json under {crops}")
    index = json.loads(index_path.read_text())
    if not index:
        raise DataError("empty segment index")
    params = GridDescriptorParams()
    rows = []
    for entry in index:
        crop = load_crop(crops / entry["file"])
        rows.append(grid_descriptor(crop, params))
    x = np.vstack(rows)
    if args.pca > 0 and x.shape[1] > args.pca:
        model = pca_fit(x, args.pca)
        x = pca_transform(model, x)
    doc_id = args.doc_id or crops.name
    fs = FeatureSet(doc_id, x, feature_source="grid_sift")
    save_feature_file(fs, args.out)
    print(f"wrote {fs.n} x {fs.dim} features for {doc_id} to {args.out}")
    return 0


def cmd_compare(args) -> int:
    fs_a = load_feature_file(args.a)
    fs_b = load_feature_file(args.b)
    pca_dim = args.pca if args.pca > 0 else None
    if args.metric == "csi":
        cmp = compare_csi(
            fs_a,
            fs_b,
            k=args.k,
            m_steps=args.msteps,
            per_doc=args.per_doc,
            runs=args.runs,
            seed=args.seed,
            pca_dim=pca_dim,
        )
        payload = {
            "doc_a": cmp.doc_a,
            "doc_b": cmp.doc_b,
            "feature_source": cmp.feature_source,
            "k": args.k,
            "m_steps": args.msteps,
            "runs": args.runs,
            "per_run_csi": [float(s.normalized) for s in cmp.per_run],
            "mean_csi": float(cmp.mean_csi),
            "entropy_curve": [float(v) for v in cmp.entropy_curve],
        }
    else:
        cmp = compare_baseline(
            fs_a,
            fs_b,
            k=args.kmeans_k,
            per_doc=args.per_doc,
            runs=args.runs,
            seed=args.seed,
            pca_dim=pca_dim,
        )
        payload = {
            "doc_a": cmp.doc_a,
            "doc_b": cmp.doc_b,
            "feature_source": cmp.feature_source,
            "kmeans_k": args.kmeans_k,
            "runs": args.runs,
            "per_run_ratio": [float(v) for v in cmp.per_run],
            "mean_ratio": float(cmp.mean_ratio),
        }
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _load_manifest(path):
    path = Path(path)
    manifest = json.loads(path.read_text())
    documents = manifest.get("documents")
    if not isinstance(documents, list) or not documents:
        raise DataError("manifest needs a non-empty 'documents' list")
    return path.parent, documents


def cmd_matrix(args) -> int:
    root, documents = _load_manifest(args.corpus)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    pca_dim = args.pca if args.pca > 0 else None
    if args.metric == "csi":
        params = {
            "k": args.k,
            "m_steps": args.msteps,
            "per_doc": args.per_doc,
            "runs": args.runs,
            "seed": args.seed,
            "pca_dim": pca_dim,
        }
    else:
        params = {
            "kmeans_k": args.kmeans_k,
            "per_doc": args.per_doc,
            "runs": args.runs,
            "seed": args.seed,
            "pca_dim": pca_dim,
        }
    for source in args.sources:
        corpus = []
        for doc in documents:
            features = doc.get("features", {})
            if source not in features:
                raise DataError(f"document {doc.get('id')!r} lacks source {source!r}")
            fs = load_feature_file(root / features[source])
            corpus.append(fs)
        m = all_pairs(corpus, args.metric, params, cache_dir=args.cache)
        stem = out / f"{args.metric}_{source}"
        save_matrix_csv(m, stem.with_suffix(".csv"))
        save_matrix_json(m, stem.with_suffix(".json"))
        print(f"wrote {stem.with_suffix('.csv')} and {stem.with_suffix('.json')}")
    return 0


def cmd_agree(args) -> int:
    matrices = [load_matrix_json(p) for p in args.matrices]
    agr = agreement(matrices)
    save_matrix_csv(agr, args.out)
    if args.json:
        save_matrix_json(agr, args.json)
    if args.pairs:
        ranked = nearest_pairs(agr)
        Path(args.pairs).write_text(
            json.dumps(
                [{"document": d, "partner": p, "value": v} for d, p, v in ranked], indent=2
            )
            + "\n"
        )
    print(f"wrote {args.out}")
    return 0


def cmd_affinity(args) -> int:
    train = [load_feature_file(p) for p in args.train]
    tests = [load_feature_file(p) for p in args.test]
    model = train_symbol_classifier(train, seed=args.seed)
    table = affinity_table(model, tests)
    save_affinity_csv(table, args.out)
    print(f"train accuracy {model.train_accuracy:.3f}; wrote {args.out}")
    return 0


def cmd_synth(args) -> int:
    raw = json.loads(Path(args.spec).read_text())
    render = raw.pop("render", None)
    try:
        spec = SynthSpec(**raw)
    except TypeError as exc:
        raise ParamError(f"bad synth spec: {exc}") from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    corpus = make_corpus_detailed(spec, max_tries=args.max_tries)
    save_feature_file(corpus.features_a, out / "a.cfea")
    save_feature_file(corpus.features_b, out / "b.cfea")
    (out / "ground_truth.json").write_text(json.dumps(ground_truth(spec)) + "\n")
    written = ["a.cfea", "b.cfea", "ground_truth.json"]
    if render is not None:
        rng = np.random.default_rng(spec.seed)
        glyphs = make_polyline_glyphs(
            spec.n_prototypes,
            rng,
            size=render.get("glyph_size", 32),
            n_points=render.get("n_points", 5),
        )
        per_symbol = render.get("instances_per_symbol", 3)
        for tag, ids in (("a", corpus.ids_a), ("b", corpus.ids_b)):
            sequence = [int(i) for i in ids for _ in range(per_symbol)]
            page = render_page(
                glyphs,
                sequence,
                per_line=render.get("per_line", 10),
                cell=render.get("cell", 56),
                glyph_size=render.get("glyph_size", 32),
                jitter=render.get("jitter", 0.5),
                rng=rng,
            )
            name = f"page_{tag}.png"
            Image.fromarray(page, mode="L").save(out / name)
            written.append(name)
    print(f"wrote {', '.join(written)} to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ciphersim",
        description="Similarity analysis between documents written in unknown alphabets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="split page images into symbol crops")
    p.add_argument("pages", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--window", type=int, default=31)
    p.add_argument("--k", type=float, default=0.2, help="threshold sensitivity")
    p.add_argument("--R", type=float, default=128.0)
    p.add_argument("--invert", action="store_true", help="ink is lighter than paper")
    p.add_argument("--rel-threshold", type=float, default=0.2)
    p.add_argument("--min-dist", type=int, default=None)
    p.add_argument("--merge-gap", type=float, default=None)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("features", help="compute features for segmented crops")
    p.add_argument("--method", choices=("grid-sift",), default="grid-sift")
    p.add_argument("--crops", required=True, help="directory with index.json")
    p.add_argument("--pca", type=int, default=DEFAULT_PCA_DIM, help="0 disables")
    p.add_argument("--doc-id", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("compare", help="score one document pair")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    _add_protocol_flags(p)
    p.add_argument("--out", default=None, help="report JSON path, default stdout")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("matrix", help="all-pairs matrix over a corpus manifest")
    p.add_argument("--corpus", required=True)
    p.add_argument("--sources", nargs="+", required=True)
    _add_protocol_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--cache", default=None)
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("agree", help="geometric-mean agreement across sources")
    p.add_argument("--matrices", nargs="+", required=True, help="matrix JSON files")
    p.add_argument("--out", required=True, help="agreement CSV")
    p.add_argument("--json", default=None)
    p.add_argument("--pairs", default=None, help="nearest-pairs JSON")
    p.set_defaults(func=cmd_agree)

    p = sub.add_parser("affinity", help="second-choice affinity table")
    p.add_argument("--train", nargs="+", required=True)
    p.add_argument("--test", nargs="+", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_affinity)

    p = sub.add_parser("synth", help="ground-truth synthetic corpus")
    p.add_argument("--spec", required=True, help="JSON with generator fields")
    p.add_argument("--out", required=True)
    p.add_argument("--max-tries", type=int, default=1000)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CipherSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
