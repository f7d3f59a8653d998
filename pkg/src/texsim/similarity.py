"""Czekanowski similarity on feature vectors and the MSE baseline."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import IncompatibleError
from .features import FeatureVector

Kind = Literal["similarity", "distance"]


@dataclass(frozen=True)
class SimilarityScore:
    value: float
    kind: Kind

    @property
    def higher_is_better(self) -> bool:
        return self.kind == "similarity"

    def __float__(self) -> float:
        return self.value


def check_compatible(v1: FeatureVector, v2: FeatureVector) -> None:
    if v1.params_digest != v2.params_digest or v1.layout != v2.layout:
        raise IncompatibleError(
            "feature vectors come from different image sizes or transform parameters"
        )


def czekanowski_values(a: np.ndarray, b: np.ndarray) -> float:
    """``1 - |a - b|_1 / |a + b|_1`` for non-negative arrays; 1 when both are zero."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise IncompatibleError(f"vector shapes differ: {a.shape} vs {b.shape}")
    denom = float(np.sum(np.abs(a + b)))
    if denom == 0.0:
        return 1.0
    return 1.0 - float(np.sum(np.abs(a - b))) / denom


def czekanowski(v1: FeatureVector, v2: FeatureVector) -> SimilarityScore:
    check_compatible(v1, v2)
    return SimilarityScore(czekanowski_values(v1.values, v2.values), "similarity")


def czekanowski_matrix(values: np.ndarray) -> np.ndarray:
    """Pairwise Czekanowski similarity between the rows of ``values``.

    Each entry equals ``czekanowski_values`` of the row pair; the matrix is
    symmetric by construction.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    out = np.ones((n, n))
    for i in range(n - 1):
        rest = values[i + 1 :]
        diff = np.abs(rest - values[i]).sum(axis=1)
        total = np.abs(rest + values[i]).sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            sim = np.where(total == 0.0, 1.0, 1.0 - diff / total)
        out[i, i + 1 :] = sim
        out[i + 1 :, i] = sim
    return out


def mse(f1: np.ndarray, f2: np.ndarray) -> SimilarityScore:
    """Mean squared pixel difference (a distance)."""
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    if f1.shape != f2.shape:
        raise IncompatibleError(f"image shapes differ: {f1.shape} vs {f2.shape}")
    return SimilarityScore(float(np.mean((f1 - f2) ** 2)), "distance")


def mse_matrix(images: np.ndarray) -> np.ndarray:
    """Pairwise MSE between equally sized images stacked along axis 0."""
    flat = np.asarray(images, dtype=float).reshape(len(images), -1)
    n = flat.shape[0]
    out = np.zeros((n, n))
    for i in range(n - 1):
        d = np.mean((flat[i + 1 :] - flat[i]) ** 2, axis=1)
        out[i, i + 1 :] = d
        out[i + 1 :, i] = d
    return out
