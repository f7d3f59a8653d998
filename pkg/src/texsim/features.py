"""Effective singular values of curvelet wedges and the texture feature vector."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .curvelet import CurveletDecomposition, CurveletParams, WedgeKey, forward, make_params
from .errors import NumericError, ZeroSpectrumError

# relative level below which singular values count as round-off
SV_CLAMP = 1e-12
# guard so that exp(log L) == L - ulp still keeps all L values
_FLOOR_GUARD = 1e-9


def singular_values(matrix: np.ndarray) -> np.ndarray:
    """Singular values of a (complex) matrix, in descending order."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.size == 0:
        raise NumericError(f"expected a non-empty 2-D matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise NumericError("matrix has non-finite entries")
    try:
        return np.linalg.svd(matrix, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"SVD did not converge: {exc}") from exc


def sv_distribution(sigma: Sequence[float]) -> np.ndarray:
    """Normalize singular values to a probability vector (divide by the l1 norm)."""
    sigma = np.asarray(sigma, dtype=float)
    total = float(np.sum(np.abs(sigma)))
    if total == 0.0:
        raise ZeroSpectrumError("singular value vector is all zero")
    return sigma / total


def _clamped(sigma: np.ndarray) -> np.ndarray:
    if sigma.size == 0:
        return sigma
    top = float(np.max(sigma))
    return np.where(sigma < SV_CLAMP * top, 0.0, sigma)


def effective_rank(sigma: Sequence[float]) -> float:
    """Exponential of the Shannon entropy of the singular value distribution.

    Uses the natural log and ``0 log 0 = 0``.  An all-zero vector has
    effective rank 0.
    """
    sigma = _clamped(np.asarray(sigma, dtype=float))
    try:
        sv_distribution(sigma)
    except ZeroSpectrumError:
        return 0.0
    # double precision drifts ~L*log(L)*eps from L on equal values; extended does not
    wide = sigma[sigma > 0].astype(np.longdouble)
    p = wide / np.sum(wide)
    return float(np.exp(-np.sum(p * np.log(p))))


def truncate(sigma: Sequence[float], q: float) -> np.ndarray:
    """Keep the first ``floor(q)`` singular values and zero the rest."""
    sigma = np.asarray(sigma, dtype=float)
    keep = int(math.floor(q + _FLOOR_GUARD))
    out = np.zeros_like(sigma)
    out[:keep] = sigma[:keep]
    return out


@dataclass(frozen=True)
class WedgeSpectrum:
    scale: int
    orientation: int
    singular_values: np.ndarray
    effective_rank: float
    effective_values: np.ndarray

    @property
    def length(self) -> int:
        return int(self.singular_values.size)


def wedge_spectrum(matrix: np.ndarray, scale: int = 0, orientation: int = 0) -> WedgeSpectrum:
    sigma = singular_values(matrix)
    q = effective_rank(sigma)
    return WedgeSpectrum(scale, orientation, sigma, q, truncate(sigma, q))


def params_digest(params: CurveletParams) -> str:
    """Short identifier binding a feature vector to image size and transform."""
    text = f"v1:{params.height}x{params.width}:J{params.scales}:K{params.orientations_coarse}"
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def feature_layout(params: CurveletParams, second_half: bool = False) -> List[WedgeKey]:
    """Wedges entering the feature vector, in concatenation order.

    Directional scales contribute orientations ``1..K(j)/2``; the other half
    duplicates them for real images.  ``second_half`` selects
    ``K(j)/2+1..K(j)`` instead (only useful for checking that claim).
    """
    keys = []
    for j in range(1, params.scales + 1):
        K = params.orientations(j)
        if params.is_directional(j):
            half = K // 2
            orients = range(half + 1, K + 1) if second_half else range(1, half + 1)
        else:
            orients = range(1, K + 1)
        keys.extend((j, k) for k in orients)
    return keys


@dataclass
class FeatureVector:
    """Concatenated effective singular values of one image.

    Attributes
    ----------
    layout : list of (scale, orientation, L)
        Block structure of ``values``.
    values : ndarray
        Non-negative feature entries.
    params_digest : str
        See :func:`params_digest`; vectors are comparable only when equal.
    effective_ranks : list of float
        Effective rank of each block, parallel to ``layout``.
    """

    layout: List[Tuple[int, int, int]]
    values: np.ndarray
    params_digest: str
    effective_ranks: List[float]

    def __len__(self) -> int:
        return int(self.values.size)

    def blocks(self):
        """Yield ``(scale, orientation, effective_rank, block_values)``."""
        offset = 0
        for (j, k, L), q in zip(self.layout, self.effective_ranks):
            yield j, k, q, self.values[offset : offset + L]
            offset += L


def extract_features(decomposition: CurveletDecomposition, second_half: bool = False) -> FeatureVector:
    params = decomposition.params
    layout, ranks, blocks = [], [], []
    for j, k in feature_layout(params, second_half):
        spec = wedge_spectrum(decomposition[(j, k)], j, k)
        layout.append((j, k, spec.length))
        ranks.append(spec.effective_rank)
        blocks.append(spec.effective_values)
    return FeatureVector(layout, np.concatenate(blocks), params_digest(params), ranks)


def image_features(
    image: np.ndarray,
    scales: int | None = None,
    orientations_coarse: int | None = None,
) -> FeatureVector:
    """Feature vector of a grayscale image (transform + extraction)."""
    image = np.asarray(image, dtype=float)
    params = make_params(image.shape[0], image.shape[1], scales, orientations_coarse)
    return extract_features(forward(image, params))
