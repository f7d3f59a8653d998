"""Texture similarity from effective singular values of curvelet coefficients."""

from .curvelet import CurveletDecomposition, CurveletParams, forward, inverse, make_params
from .features import FeatureVector, effective_rank, extract_features, image_features
from .similarity import SimilarityScore, czekanowski, mse

__version__ = "0.1.0"


def texture_similarity(image_a, image_b, scales=None, orientations_coarse=None) -> float:
    """Texture similarity of two equally sized grayscale images, in [0, 1]."""
    fa = image_features(image_a, scales, orientations_coarse)
    fb = image_features(image_b, scales, orientations_coarse)
    return czekanowski(fa, fb).value


__all__ = [
    "CurveletDecomposition",
    "CurveletParams",
    "FeatureVector",
    "SimilarityScore",
    "czekanowski",
    "effective_rank",
    "extract_features",
    "forward",
    "image_features",
    "inverse",
    "make_params",
    "mse",
    "texture_similarity",
]
