"""Synthetic corpora with ground-truth symbol overlap.

Two documents share a controlled number of symbol prototypes; samples
scatter around the prototypes with Gaussian spread. Because the true
overlap is known, these corpora act as oracles for the similarity
metrics. A rendered mode additionally rasterizes prototypes as jittered
polyline glyphs on page images to exercise the full pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image, ImageDraw

from .corpus import FeatureSet
from .errors import FeasibilityError, ParamError


@dataclass(frozen=True)
class SynthSpec:
    alphabet_size_a: int = 34
    alphabet_size_b: int = 34
    shared: int = 17
    dim: int = 16
    spread: float = 0.1
    separation: float = 1.0
    samples_per_symbol: int = 30
    seed: int = 0

    def __post_init__(self):
        if min(self.alphabet_size_a, self.alphabet_size_b) < 1:
            raise ParamError("alphabet sizes must be >= 1")
        if not 0 <= self.shared <= min(self.alphabet_size_a, self.alphabet_size_b):
            raise ParamError("shared must be in [0, min(alphabet sizes)]")
        if self.spread <= 0 or self.separation <= 0:
            raise ParamError("spread and separation must be > 0")
        if self.dim < 1 or self.samples_per_symbol < 1:
            raise ParamError("dim and samples_per_symbol must be >= 1")

    @property
    def overlap(self) -> float:
        return self.shared / ((self.alphabet_size_a + self.alphabet_size_b) / 2)

    @property
    def n_prototypes(self) -> int:
        return self.alphabet_size_a + self.alphabet_size_b - self.shared


@dataclass(frozen=True)
class SynthCorpus:
    """Full generator output, including the latents the oracles need."""

    features_a: FeatureSet
    features_b: FeatureSet
    prototypes: np.ndarray     # n_prototypes x dim
    ids_a: np.ndarray          # prototype index per alphabet slot
    ids_b: np.ndarray
    labels_a: np.ndarray       # generating prototype per sample row
    labels_b: np.ndarray
    overlap: float


def _sample_prototypes(rng, n, dim, separation, max_tries) -> np.ndarray:
    # candidate scale grows with the packing demand so that the default
    # cap is generous; genuinely tight packings still fail loudly
    scale = separation * max(1.0, n ** (1.0 / dim))
    accepted = np.empty((n, dim))
    for i in range(n):
        for _ in range(max_tries):
            cand = rng.normal(0.0, scale, size=dim)
            if i == 0 or np.min(np.linalg.norm(accepted[:i] - cand, axis=1)) >= separation:
                accepted[i] = cand
                break
        else:
            raise FeasibilityError(
                f"could not place prototype {i} of {n} at separation "
                f"{separation} in dim {dim} within {max_tries} tries"
            )
    return accepted


def make_corpus_detailed(spec: SynthSpec, max_tries: int = 1000) -> SynthCorpus:
    """Generate both documents plus the latent prototypes and labels."""
    if max_tries < 1:
        raise ParamError("max_tries must be >= 1")
    rng = np.random.default_rng(spec.seed)
    protos = _sample_prototypes(rng, spec.n_prototypes, spec.dim, spec.separation, max_tries)
    ids_a = np.arange(spec.alphabet_size_a)
    ids_b = np.concatenate(
        [np.arange(spec.shared), np.arange(spec.alphabet_size_a, spec.n_prototypes)]
    )

    def draw(ids):
        labels = np.repeat(ids, spec.samples_per_symbol)
        noise = rng.normal(0.0, spec.spread, size=(labels.shape[0], spec.dim))
        return protos[labels] + noise, labels

    vec_a, labels_a = draw(ids_a)
    vec_b, labels_b = draw(ids_b)
    tag = f"synth-{spec.seed}"
    return SynthCorpus(
        features_a=FeatureSet(f"{tag}-a", vec_a, feature_source="synthetic"),
        features_b=FeatureSet(f"{tag}-b", vec_b, feature_source="synthetic"),
        prototypes=protos,
        ids_a=ids_a,
        ids_b=ids_b,
        labels_a=labels_a,
        labels_b=labels_b,
        overlap=spec.overlap,
    )


def make_corpus(spec: SynthSpec, max_tries: int = 1000):
    """The two documents and their true overlap fraction."""
    corpus = make_corpus_detailed(spec, max_tries=max_tries)
    return corpus.features_a, corpus.features_b, corpus.overlap


def ground_truth(spec: SynthSpec) -> dict:
    """JSON-ready record of what the generator shared between documents."""
    return {"overlap": spec.overlap, "shared_ids": list(range(spec.shared))}


# --- rendered-image mode -----------------------------------------------------

def make_polyline_glyphs(n_glyphs: int, rng, size: int = 32, n_points: int = 5):
    """Random open polylines, one per prototype, in glyph-box coordinates."""
    if n_glyphs < 1 or n_points < 2 or size < 8:
        raise ParamError("need n_glyphs >= 1, n_points >= 2, size >= 8")
    return [rng.uniform(3.0, size - 3.0, size=(n_points, 2)) for _ in range(n_glyphs)]


def render_glyph(polyline, size: int = 32, jitter: float = 0.0, rng=None, width: int = 2):
    """Rasterize one polyline as ink on white, vertices jittered per draw."""
    pts = np.asarray(polyline, dtype=np.float64)
    if jitter > 0:
        if rng is None:
            raise ParamError("jitter > 0 needs an rng")
        pts = pts + rng.normal(0.0, jitter, size=pts.shape)
    pts = np.clip(pts, 1.0, size - 2.0)
    img = Image.new("L", (size, size), 255)
    draw = ImageDraw.Draw(img)
    draw.line([tuple(p) for p in pts], fill=0, width=width, joint="curve")
    return np.asarray(img, dtype=np.uint8)


def render_page(
    glyphs,
    ids,
    per_line: int = 10,
    cell: int = 56,
    glyph_size: int = 32,
    jitter: float = 0.5,
    rng=None,
    margin: int = 30,
):
    """Lay glyph instances out on a grid page, one cell per symbol."""
    ids = list(ids)
    if not ids:
        raise ParamError("ids must be non-empty")
    if cell < glyph_size + 8:
        raise ParamError("cell too small for the glyph size")
    rng = rng if rng is not None else np.random.default_rng(0)
    n_lines = (len(ids) + per_line - 1) // per_line
    h = 2 * margin + n_lines * cell
    w = 2 * margin + per_line * cell
    page = np.full((h, w), 255, dtype=np.uint8)
    pad = (cell - glyph_size) // 2
    for idx, gid in enumerate(ids):
        row, col = divmod(idx, per_line)
        y = margin + row * cell + pad
        x = margin + col * cell + pad
        tile = render_glyph(glyphs[gid], size=glyph_size, jitter=jitter, rng=rng)
        page[y : y + glyph_size, x : x + glyph_size] = np.minimum(
            page[y : y + glyph_size, x : x + glyph_size], tile
        )
    return page
