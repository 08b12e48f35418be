"""Handcrafted dense-grid gradient descriptor and PCA reduction.

Symbol crops are resized to a fixed square, gradients are histogrammed per
orientation inside a grid of keypoint patches (upright, no orientation
normalization: a rotated glyph is a different glyph), and the concatenated
descriptor is optionally projected to 50 dimensions with PCA.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import DimError, InputError, ParamError, RankError


@dataclass(frozen=True)
class GridDescriptorParams:
    resize: int = 64
    grid: int = 4
    subcells: int = 4
    orientation_bins: int = 8
    smooth_sigma: float = 1.0
    clip: float = 0.2

    def __post_init__(self):
        if min(self.resize, self.grid, self.subcells, self.orientation_bins) < 1:
            raise ParamError("all descriptor counts must be >= 1")
        if self.resize < self.grid:
            raise ParamError("resize must be >= grid")

    @property
    def length(self) -> int:
        return self.grid**2 * self.subcells**2 * self.orientation_bins


def _resize_nearest(mask: np.ndarray, side: int) -> np.ndarray:
    h, w = mask.shape
    rows = np.minimum((np.arange(side) * h) // side, h - 1)
    cols = np.minimum((np.arange(side) * w) // side, w - 1)
    return mask[np.ix_(rows, cols)]


def grid_descriptor(crop: np.ndarray, params: GridDescriptorParams | None = None) -> np.ndarray:
    """Dense upright descriptor of a binary symbol crop.

    The crop is resized (nearest-neighbor) to ``resize`` square and smoothed;
    gradients come from central differences. Each of the grid x grid keypoint
    patches contributes a subcells x subcells x orientation_bins histogram of
    gradient magnitudes, Gaussian-weighted from the patch center, linearly
    interpolated across orientation bins, L2-normalized, clipped at ``clip``
    and renormalized. Entries end up in [0, 1].
    """
    params = params or GridDescriptorParams()
    crop = np.asarray(crop)
    if crop.ndim != 2 or crop.size == 0:
        raise InputError("crop must be a non-empty 2-D array")

    img = gaussian_filter(
        _resize_nearest(crop.astype(np.float64), params.resize), params.smooth_sigma
    )
    gy, gx = np.gradient(img)
    mag = np.hypot(gx, gy)
    ang = np.arctan2(gy, gx)  # [-pi, pi]

    nb = params.orientation_bins
    # continuous bin coordinate in [0, nb); split mass over the two
    # neighboring bins so the histogram moves smoothly with the gradient
    t = (ang + math.pi) / (2 * math.pi) * nb
    b0 = np.floor(t).astype(np.int64) % nb
    frac = t - np.floor(t)
    b1 = (b0 + 1) % nb

    side = params.resize
    patch = side // params.grid
    sub = patch / params.subcells
    yy, xx = np.mgrid[0:patch, 0:patch]
    center = (patch - 1) / 2.0
    gauss = np.exp(-((yy - center) ** 2 + (xx - center) ** 2) / (2 * (patch / 2.0) ** 2))
    sub_row = np.minimum((yy / sub).astype(np.int64), params.subcells - 1)
    sub_col = np.minimum((xx / sub).astype(np.int64), params.subcells - 1)
    cell_of = sub_row * params.subcells + sub_col

    out = np.zeros((params.grid * params.grid, params.subcells**2, nb))
    for gr in range(params.grid):
        for gc in range(params.grid):
            ys, xs = gr * patch, gc * patch
            sl = np.s_[ys : ys + patch, xs : xs + patch]
            w = mag[sl] * gauss
            hist = np.zeros((params.subcells**2, nb))
            np.add.at(hist, (cell_of, b0[sl]), w * (1.0 - frac[sl]))
            np.add.at(hist, (cell_of, b1[sl]), w * frac[sl])
            kp = gr * params.grid + gc
            norm = np.linalg.norm(hist)
            if norm > 0:
                hist /= norm
                np.minimum(hist, params.clip, out=hist)
                renorm = np.linalg.norm(hist)
                if renorm > 0:
                    hist /= renorm
            out[kp] = hist
    return out.ravel()


@dataclass(frozen=True)
class PcaModel:
    """Mean vector plus orthonormal principal axes (rows), variance-ordered."""

    mean: np.ndarray
    components: np.ndarray          # out_dim x dim
    explained_variance: np.ndarray  # out_dim, non-increasing

    @property
    def out_dim(self) -> int:
        return self.components.shape[0]

    @property
    def dim(self) -> int:
        return self.components.shape[1]


def pca_fit(vectors: np.ndarray, out_dim: int, strict_rank: bool = False) -> PcaModel:
    """Fit PCA by SVD of the mean-centered data.

    Component signs are fixed so each row's largest-magnitude entry is
    positive. Directions beyond the numerical rank are orthonormal
    null-space padding with ~zero variance; ``strict_rank`` turns such a
    request into a RankError instead.
    """
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ParamError("need an N x dim matrix with N >= 2")
    n, dim = x.shape
    if not 1 <= out_dim <= min(n - 1, dim):
        raise ParamError(f"out_dim must be in [1, {min(n - 1, dim)}], got {out_dim}")

    mean = x.mean(axis=0)
    centered = x - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    if strict_rank:
        rank = int(np.sum(s > s[0] * 1e-12)) if s[0] > 0 else 0
        if out_dim > rank:
            raise RankError(f"requested {out_dim} components but data rank is {rank}")

    components = vt[:out_dim]
    variance = (s[:out_dim] ** 2) / (n - 1)
    flip = np.where(
        components[np.arange(out_dim), np.abs(components).argmax(axis=1)] < 0, -1.0, 1.0
    )
    return PcaModel(
        mean=mean, components=components * flip[:, None], explained_variance=variance
    )


def pca_transform(model: PcaModel, vectors: np.ndarray) -> np.ndarray:
    x = np.asarray(vectors, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != model.dim:
        raise DimError(f"vectors have dim {x.shape[1]}, model expects {model.dim}")
    return (x - model.mean) @ model.components.T


def pca_inverse_transform(model: PcaModel, projected: np.ndarray) -> np.ndarray:
    y = np.asarray(projected, dtype=np.float64)
    if y.ndim == 1:
        y = y[None, :]
    if y.shape[1] != model.out_dim:
        raise DimError(f"projection has dim {y.shape[1]}, model has {model.out_dim}")
    return y @ model.components + model.mean
