"""Unsupervised symbol segmentation from page images.

Pipeline: Sauvola local thresholding, text-line detection on the horizontal
projection profile, per-line 8-connected components, and aggregation of
close objects (dots and accents belong to their base stroke).

Image conventions: a grayscale page is a 2-D uint8 array (0 = black ink,
255 = white paper); a binary mask is a 2-D bool array (True = ink).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage
from scipy.signal import find_peaks

from .errors import InputError, ParamError

EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


@dataclass(frozen=True)
class LineBand:
    """Row span of one text line, y_top inclusive, y_bottom exclusive."""

    y_top: int
    y_bottom: int

    def __post_init__(self):
        if not 0 <= self.y_top < self.y_bottom:
            raise ParamError(f"invalid band [{self.y_top}, {self.y_bottom})")

    @property
    def height(self) -> int:
        return self.y_bottom - self.y_top


@dataclass(frozen=True)
class Component:
    """One connected blob: its page-coordinate bbox and pixel coordinates."""

    bbox: tuple[int, int, int, int]   # x, y, w, h
    ys: np.ndarray
    xs: np.ndarray

    @property
    def n_pixels(self) -> int:
        return self.ys.shape[0]


@dataclass(frozen=True)
class SymbolImage:
    """A segmented glyph: binary crop plus its position on the page."""

    crop: np.ndarray                  # bool, h x w
    bbox: tuple[int, int, int, int]   # x, y, w, h in page coordinates
    line_index: int = 0

    def __post_init__(self):
        if not self.crop.any():
            raise InputError("symbol crop has no foreground pixels")

    @property
    def n_pixels(self) -> int:
        return int(self.crop.sum())


@dataclass(frozen=True)
class SegmentParams:
    window: int = 31
    k: float = 0.2
    R: float = 128.0
    invert: bool = False
    rel_threshold: float = 0.2
    min_dist: int | None = None       # None: 0.5 x median band height, two-pass
    merge_gap: float | None = None    # None: 15% of the line-band height


def _window_stats(img: np.ndarray, window: int):
    """Local mean and standard deviation over a window clamped at borders.

    Integral images over edge-replicated padding; sums of integer-valued
    pixels stay exact in float64, so results are reproducible bit for bit.
    """
    r = window // 2
    h, w = img.shape
    out = []
    for values in (img, img * img):
        padded = np.pad(values, r, mode="edge")
        cs = np.zeros((h + 2 * r + 1, w + 2 * r + 1))
        np.cumsum(np.cumsum(padded, axis=0), axis=1, out=cs[1:, 1:])
        out.append(
            (
                cs[window:, window:]
                - cs[:-window, window:]
                - cs[window:, :-window]
                + cs[:-window, :-window]
            )
            / (window * window)
        )
    mean, sq_mean = out
    std = np.sqrt(np.maximum(sq_mean - mean * mean, 0.0))
    return mean, std


def sauvola_binarize(
    img: np.ndarray,
    window: int = 31,
    k: float = 0.2,
    R: float = 128.0,
    invert: bool = False,
) -> np.ndarray:
    """Local adaptive threshold T = m * (1 + k*(s/R - 1)); ink where the
    intensity falls at or below T. ``invert`` handles white-on-black pages."""
    if window % 2 == 0 or window < 3:
        raise ParamError(f"window must be odd and >= 3, got {window}")
    if R <= 0:
        raise ParamError("R must be > 0")
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise InputError("image must be a non-empty 2-D array")
    if invert:
        img = 255.0 - img
    mean, std = _window_stats(img, window)
    threshold = mean * (1.0 + k * (std / R - 1.0))
    return img <= threshold


def detect_lines(
    mask: np.ndarray,
    min_dist: int | None = None,
    rel_threshold: float = 0.2,
) -> list[LineBand]:
    """Text-line bands from peaks of the per-row foreground profile.

    Peaks at least ``rel_threshold`` of the profile maximum and ``min_dist``
    rows apart each expand to the contiguous inked row run around them,
    cut at the profile minimum between neighboring peaks. With
    ``min_dist=None`` a first pass estimates the median band height and the
    final pass uses half of it.
    """
    if not 0 <= rel_threshold <= 1:
        raise ParamError("rel_threshold must be in [0, 1]")
    profile = np.asarray(mask).sum(axis=1).astype(np.float64)
    if profile.max() == 0:
        return []
    if min_dist is None:
        first = _bands_from_profile(profile, 1, rel_threshold)
        if not first:
            return []
        median_h = float(np.median([b.height for b in first]))
        min_dist = max(1, int(round(0.5 * median_h)))
    if min_dist < 1:
        raise ParamError("min_dist must be >= 1")
    return _bands_from_profile(profile, min_dist, rel_threshold)


def _bands_from_profile(profile, min_dist, rel_threshold) -> list[LineBand]:
    h = profile.shape[0]
    # zero-pad so lines touching the page edge still register as peaks
    padded = np.concatenate([[0.0], profile, [0.0]])
    peaks, _ = find_peaks(padded, height=rel_threshold * profile.max(), distance=min_dist)

    # a peak's band is the contiguous inked run around it; peaks that share
    # a run would expand to the same valley-bounded band, so deduplicate
    bands: list[LineBand] = []
    for p in (int(q) - 1 for q in peaks):
        top = p
        while top - 1 >= 0 and profile[top - 1] > 0:
            top -= 1
        bottom = p
        while bottom + 1 < h and profile[bottom + 1] > 0:
            bottom += 1
        band = LineBand(top, bottom + 1)
        if not bands or band != bands[-1]:
            bands.append(band)
    return bands


def connected_components(mask: np.ndarray) -> list[Component]:
    """8-connected foreground components, in label scan order."""
    mask = np.asarray(mask, dtype=bool)
    labeled, n = ndimage.label(mask, structure=EIGHT_CONNECTED)
    comps = []
    for label, sl in enumerate(ndimage.find_objects(labeled), start=1):
        ys, xs = np.nonzero(labeled[sl] == label)
        y0, x0 = sl[0].start, sl[1].start
        ys = ys + y0
        xs = xs + x0
        bbox = (x0, y0, sl[1].stop - x0, sl[0].stop - y0)
        comps.append(Component(bbox=bbox, ys=ys, xs=xs))
    return comps


def merge_close(
    components: list[Component], gap: float, line_index: int = 0
) -> list[SymbolImage]:
    """Merge components whose boxes, grown by gap/2 per side, intersect
    (transitively); touching counts. Output sorted by bbox x."""
    if gap < 0:
        raise ParamError("gap must be >= 0")
    n = len(components)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    half = gap / 2.0
    boxes = []
    for c in components:
        x, y, w, h = c.bbox
        boxes.append((x - half, y - half, x + w + half, y + h + half))
    for i in range(n):
        for j in range(i + 1, n):
            a, b = boxes[i], boxes[j]
            if a[0] <= b[2] and b[0] <= a[2] and a[1] <= b[3] and b[1] <= a[3]:
                parent[find(i)] = find(j)

    groups: dict[int, list[Component]] = {}
    for i, c in enumerate(components):
        groups.setdefault(find(i), []).append(c)

    symbols = []
    for members in groups.values():
        x0 = min(c.bbox[0] for c in members)
        y0 = min(c.bbox[1] for c in members)
        x1 = max(c.bbox[0] + c.bbox[2] for c in members)
        y1 = max(c.bbox[1] + c.bbox[3] for c in members)
        crop = np.zeros((y1 - y0, x1 - x0), dtype=bool)
        for c in members:
            crop[c.ys - y0, c.xs - x0] = True
        symbols.append(
            SymbolImage(crop=crop, bbox=(x0, y0, x1 - x0, y1 - y0), line_index=line_index)
        )
    symbols.sort(key=lambda s: (s.bbox[0], s.bbox[1]))
    return symbols


def segment_page(img: np.ndarray, params: SegmentParams | None = None) -> list[SymbolImage]:
    """Binarize, find line bands, split each band into components and merge
    close objects. Symbols carry their band's index and page-coordinate
    boxes; fully deterministic."""
    params = params or SegmentParams()
    mask = sauvola_binarize(
        img, window=params.window, k=params.k, R=params.R, invert=params.invert
    )
    bands = detect_lines(mask, min_dist=params.min_dist, rel_threshold=params.rel_threshold)
    symbols = []
    for li, band in enumerate(bands):
        comps = connected_components(mask[band.y_top : band.y_bottom, :])
        shifted = [
            Component(
                bbox=(c.bbox[0], c.bbox[1] + band.y_top, c.bbox[2], c.bbox[3]),
                ys=c.ys + band.y_top,
                xs=c.xs,
            )
            for c in comps
        ]
        gap = params.merge_gap if params.merge_gap is not None else 0.15 * band.height
        symbols.extend(merge_close(shifted, gap, line_index=li))
    return symbols


# --- page and crop I/O -------------------------------------------------------

def load_gray(path) -> np.ndarray:
    """Read a PNG/PGM page as a uint8 grayscale array."""
    with Image.open(Path(path)) as im:
        return np.asarray(im.convert("L"), dtype=np.uint8)


def save_crop(symbol: SymbolImage, path) -> None:
    """Write one symbol crop as an 8-bit PNG, ink black on white."""
    img = np.where(symbol.crop, 0, 255).astype(np.uint8)
    Image.fromarray(img, mode="L").save(Path(path))


def load_crop(path) -> np.ndarray:
    """Read a crop PNG back into a boolean ink mask."""
    return load_gray(path) < 128
