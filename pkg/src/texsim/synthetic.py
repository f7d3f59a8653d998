"""Procedural texture classes for self-contained retrieval checks."""

from __future__ import annotations

import numpy as np

# (cycles per pixel, orientation in degrees), one pair per class
GRATINGS = [
    (0.05, 0.0),
    (0.08, 18.0),
    (0.11, 36.0),
    (0.14, 54.0),
    (0.17, 72.0),
    (0.06, 90.0),
    (0.09, 108.0),
    (0.12, 126.0),
    (0.15, 144.0),
    (0.20, 162.0),
]


def grating(size: int, frequency: float, angle_deg: float, phase: float) -> np.ndarray:
    theta = np.deg2rad(angle_deg)
    y, x = np.mgrid[0:size, 0:size]
    return np.sin(2 * np.pi * frequency * (x * np.cos(theta) + y * np.sin(theta)) + phase)


def grating_dataset(classes: int = 10, samples: int = 4, size: int = 128, noise: float = 0.1, seed: int = 0):
    """Oriented sinusoidal gratings with random phase plus Gaussian noise.

    Returns ``(images, labels)``; images are clipped to [0, 1] and ordered
    class by class.  ``noise`` is the noise standard deviation relative to
    the unit intensity range.
    """
    if classes > len(GRATINGS):
        raise ValueError(f"at most {len(GRATINGS)} classes available")
    rng = np.random.default_rng(seed)
    images, labels = [], []
    for c in range(classes):
        freq, angle = GRATINGS[c]
        for _ in range(samples):
            img = 0.5 + 0.35 * grating(size, freq, angle, rng.uniform(0, 2 * np.pi))
            img += noise * rng.standard_normal((size, size))
            images.append(np.clip(img, 0.0, 1.0))
            labels.append(c)
    return np.stack(images), labels
