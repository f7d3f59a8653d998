"""Image loading, luminance conversion and texture dataset preparation."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np
from PIL import Image

from .errors import ConfigurationError, DimensionError

log = logging.getLogger(__name__)

REC601 = (0.299, 0.587, 0.114)
IMAGE_SUFFIXES = {".png", ".bmp", ".tif", ".tiff", ".pgm", ".ppm", ".jpg", ".jpeg"}

CURET_CROP = 256
CURET_SAMPLES = 3
PERTEX_FACTOR = 4
PATCH = 128
MANIFEST_VERSION = 1


def as_gray(image) -> np.ndarray:
    """Validate a grayscale image: 2-D, finite, values in [0, 1]."""
    arr = np.asarray(image, dtype=float)
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionError(f"expected a non-empty 2-D image, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DimensionError("image has non-finite pixels")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise DimensionError("pixel values must lie in [0, 1]")
    return arr


def to_luminance(rgb) -> np.ndarray:
    """Rec. 601 luma of an RGB image.

    ``rgb`` is either an ``(H, W, 3)`` array or a sequence of three ``(H, W)``
    channels, with values in [0, 1].
    """
    if isinstance(rgb, np.ndarray) and rgb.ndim == 3:
        if rgb.shape[2] != 3:
            raise DimensionError(f"expected 3 channels, got {rgb.shape[2]}")
        channels = [rgb[..., c] for c in range(3)]
    else:
        channels = [np.asarray(c, dtype=float) for c in rgb]
        if len(channels) != 3:
            raise DimensionError(f"expected 3 channels, got {len(channels)}")
        if len({c.shape for c in channels}) != 1:
            raise DimensionError(f"channel shapes differ: {[c.shape for c in channels]}")
    r, g, b = (np.asarray(c, dtype=float) for c in channels)
    y = REC601[0] * r + REC601[1] * g + REC601[2] * b
    return np.clip(y, 0.0, 1.0)


def _scale_for(arr: np.ndarray) -> float:
    if arr.dtype == np.uint8:
        return 255.0
    if arr.dtype == np.uint16:
        return 65535.0
    if arr.dtype == bool:
        return 1.0
    if np.issubdtype(arr.dtype, np.integer):
        # 32-bit integer modes, typically widened 16-bit data
        return 65535.0 if arr.max() > 255 else 255.0
    return 1.0


def load_image(path) -> np.ndarray:
    """Read an image file as a grayscale array in [0, 1].

    Color images are reduced to luminance; alpha is dropped.
    """
    with Image.open(path) as im:
        if im.mode in ("P", "PA", "CMYK", "YCbCr", "LAB", "HSV"):
            im = im.convert("RGBA" if "A" in im.mode else "RGB")
        if im.mode == "LA":
            im = im.convert("L")
        arr = np.asarray(im)
    if arr.ndim == 3:
        rgb = arr[..., :3].astype(float) / _scale_for(arr)
        return to_luminance(rgb)
    return as_gray(arr.astype(float) / _scale_for(arr))


def save_image(path, image: np.ndarray) -> None:
    """Write a grayscale image as a 16-bit PNG."""
    img = as_gray(image)
    data = np.rint(img * 65535.0).astype(np.uint16)
    Image.fromarray(data).save(path)


def center_crop(image: np.ndarray, height: int, width: int) -> np.ndarray:
    h, w = image.shape
    if h < height or w < width:
        raise DimensionError(f"image {h}x{w} is smaller than {height}x{width}")
    top, left = (h - height) // 2, (w - width) // 2
    return image[top : top + height, left : left + width]


def tile(image: np.ndarray, size: int) -> List[np.ndarray]:
    """Non-overlapping ``size`` x ``size`` patches in row-major order."""
    h, w = image.shape
    return [
        image[r : r + size, c : c + size]
        for r in range(0, h - size + 1, size)
        for c in range(0, w - size + 1, size)
    ]


def box_downsample(image: np.ndarray, factor: int) -> np.ndarray:
    h, w = image.shape
    if h % factor or w % factor:
        raise DimensionError(f"image {h}x{w} is not divisible by {factor}")
    return image.reshape(h // factor, factor, w // factor, factor).mean(axis=(1, 3))


def prepare_curet(image) -> List[np.ndarray]:
    """Three 128x128 patches from the central 256x256 region.

    The region splits into four patches; the first three in row-major order
    (top-left, top-right, bottom-left) are kept.
    """
    image = as_gray(image)
    region = center_crop(image, CURET_CROP, CURET_CROP)
    return [p.copy() for p in tile(region, PATCH)[:CURET_SAMPLES]]


def prepare_pertex(image) -> List[np.ndarray]:
    """Downsample by 4 (box average) and split into four 128x128 quadrants."""
    image = as_gray(image)
    size = PATCH * 2 * PERTEX_FACTOR
    if image.shape != (size, size):
        raise DimensionError(f"expected a {size}x{size} image, got {image.shape[0]}x{image.shape[1]}")
    small = box_downsample(image, PERTEX_FACTOR)
    return [p.copy() for p in tile(small, PATCH)]


PREPARERS = {"curet": prepare_curet, "pertex": prepare_pertex}


def list_images(directory) -> List[Path]:
    directory = Path(directory)
    return sorted(p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def prepare_dataset(source_dir, kind: str, out_dir) -> Tuple[dict, Dict[str, str]]:
    """Cut every image in ``source_dir`` into patches and write a manifest.

    Each source image becomes one class named after its file stem.  Patches
    are stored as ``<class>_<sample>.png``.  Returns the manifest and a
    mapping of failed source files to error messages; failed files are left
    out of the manifest.
    """
    if kind not in PREPARERS:
        raise ConfigurationError(f"unknown dataset kind {kind!r}; choose from {sorted(PREPARERS)}")
    sources = list_images(source_dir)
    if not sources:
        raise ConfigurationError(f"no images found in {source_dir}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    entries, failures = [], {}
    for src in sources:
        try:
            patches = PREPARERS[kind](load_image(src))
        except (OSError, ValueError) as exc:
            failures[str(src)] = str(exc)
            log.error("skipping %s: %s", src, exc)
            continue
        for s, patch in enumerate(patches):
            name = f"{src.stem}_{s}.png"
            save_image(out_dir / name, patch)
            entries.append({"class": src.stem, "sample": s, "file": name})

    manifest = make_manifest(entries, kind)
    write_manifest(out_dir / "manifest.json", manifest)
    log.info("prepared %d classes x %d samples", manifest["classes"], manifest["samples_per_class"])
    return manifest, failures


def make_manifest(entries: Sequence[dict], kind: str = "custom") -> dict:
    classes = sorted({e["class"] for e in entries})
    per_class = len(entries) // len(classes) if classes else 0
    return {
        "version": MANIFEST_VERSION,
        "dataset": kind,
        "classes": len(classes),
        "samples_per_class": per_class,
        "entries": list(entries),
    }


def write_manifest(path, manifest: dict) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2) + "\n")


def read_manifest(path) -> dict:
    """Load and sanity-check a manifest."""
    try:
        manifest = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read manifest {path}: {exc}") from exc
    if manifest.get("version") != MANIFEST_VERSION:
        raise ConfigurationError(f"unsupported manifest version {manifest.get('version')!r}")
    entries = manifest.get("entries")
    if not entries:
        raise ConfigurationError("manifest has no entries")
    for e in entries:
        if not {"class", "sample", "file"} <= set(e):
            raise ConfigurationError(f"malformed manifest entry {e!r}")
    return manifest
