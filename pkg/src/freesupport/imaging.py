"""Grayscale images as point clouds of their foreground pixels."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .measures import DiscreteMeasure, make_measure
from .rng import as_generator


class ImageError(ValueError):
    pass


@dataclass(frozen=True)
class GrayImage:
    pixels: np.ndarray

    def __post_init__(self):
        px = np.atleast_2d(np.asarray(self.pixels, dtype=float)).copy()
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ImageError(f"image must be a nonempty 2-d array, got shape {px.shape}")
        if not np.all(np.isfinite(px)) or px.min() < 0.0 or px.max() > 1.0:
            raise ImageError("intensities must lie in [0, 1]")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def shape(self):
        return self.pixels.shape


def _as_image(img) -> GrayImage:
    return img if isinstance(img, GrayImage) else GrayImage(img)


def otsu_threshold(img, bins: int = 256) -> float:
    """Histogram threshold maximising the between-class variance.

    Candidates are the interior bin edges of a ``bins``-level histogram on
    [0, 1]; pixels strictly above the returned edge are foreground. Ties go
    to the lowest edge.
    """
    px = _as_image(img).pixels.ravel()
    if px.max() == px.min():
        raise ImageError("constant image has no Otsu threshold")
    edges = np.linspace(0.0, 1.0, bins + 1)
    # right-closed bins (e_k, e_k+1], so "<= edge" is exactly the lower class
    idx = np.clip(np.searchsorted(edges, px, side="left") - 1, 0, bins - 1)
    counts = np.bincount(idx, minlength=bins)
    # per-bin intensity sums, so class means use the actual pixel values
    sums = np.bincount(idx, weights=px, minlength=bins)
    prob = counts / counts.sum()
    w0 = np.cumsum(prob)[:-1]
    mu0_sum = np.cumsum(sums / counts.sum())[:-1]
    total_mean = float(px.mean())
    w1 = 1.0 - w0
    with np.errstate(divide="ignore", invalid="ignore"):
        between = (total_mean * w0 - mu0_sum) ** 2 / (w0 * w1)
    between[(w0 <= 0) | (w1 <= 0)] = -np.inf
    return float(edges[1 + int(np.argmax(between))])


def image_to_measure(img, bins: int = 256) -> DiscreteMeasure:
    """Uniform measure on the (row, col) coordinates of above-threshold pixels."""
    image = _as_image(img)
    thr = otsu_threshold(image, bins)
    rows, cols = np.nonzero(image.pixels > thr)
    if rows.size == 0:
        raise ImageError("no foreground pixels above the Otsu threshold")
    return make_measure(np.column_stack([rows, cols]).astype(float))


def read_image_csv(path) -> GrayImage:
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ImageError(f"{path}:{lineno}: {exc}") from None
    if len({len(r) for r in rows}) > 1:
        raise ImageError(f"{path}: rows have unequal lengths")
    return GrayImage(np.array(rows))


def write_image_csv(path, img) -> None:
    np.savetxt(path, _as_image(img).pixels, delimiter=",", fmt="%.6g")


def load_dataset(directory) -> list[tuple[str, GrayImage, str]]:
    """Read ``labels.csv`` (filename,label) and every image it lists."""
    directory = Path(directory)
    labels_path = directory / "labels.csv"
    if not labels_path.exists():
        raise ImageError(f"{directory} has no labels.csv")
    out = []
    with open(labels_path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or (lineno == 1 and row[0].strip().lower() == "filename"):
                continue
            if len(row) != 2:
                raise ImageError(f"{labels_path}:{lineno}: expected 'filename,label'")
            name, label = row[0].strip(), row[1].strip()
            out.append((name, read_image_csv(directory / name), label))
    return out


def glyph(kind: str, size: int = 28, rng=None, jitter: int = 3, noise: float = 0.05) -> np.ndarray:
    """Synthetic glyph: a filled square (``"square"``) or a hollow ring (``"ring"``).

    Position and extent are jittered by up to ``jitter`` pixels and low
    amplitude background noise is added.
    """
    rng = as_generator(rng)
    img = rng.uniform(0.0, noise, (size, size))
    cy, cx = size / 2 + rng.integers(-jitter, jitter + 1, 2)
    rr, cc = np.mgrid[0:size, 0:size]
    if kind == "square":
        half = size * 0.22 + rng.integers(-1, 2)
        mask = (np.abs(rr - cy) <= half) & (np.abs(cc - cx) <= half)
    elif kind == "ring":
        radius = size * 0.3 + rng.integers(-1, 2)
        dist = np.hypot(rr - cy, cc - cx)
        mask = np.abs(dist - radius) <= 1.5
    else:
        raise ValueError(f"unknown glyph kind {kind!r}")
    img[mask] = rng.uniform(0.8, 1.0, int(mask.sum()))
    return np.clip(img, 0.0, 1.0)


def write_glyph_dataset(directory, per_class: int = 50, seed: int = 0, size: int = 28) -> Path:
    """Write a two-class square/ring dataset in the image-CSV layout."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rng = as_generator(seed)
    with open(directory / "labels.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["filename", "label"])
        for kind in ("square", "ring"):
            for k in range(per_class):
                name = f"{kind}_{k:04d}.csv"
                write_image_csv(directory / name, glyph(kind, size, rng))
                writer.writerow([name, kind])
    return directory
