"""Fast discrete curvelet transform via wedge windowing and wrapping.

The frequency plane is tiled by concentric squares (one corona per scale)
and each directional corona is split into angular wedges.  Windows form a
squared partition of unity, every windowed wedge is periodized into a small
rectangle and brought back to space with an inverse FFT.  The transform is
a tight frame: it preserves energy and its adjoint is its inverse.

Wedges are indexed ``(j, k)`` with ``j = 1`` the low-pass square, ``j = J``
the undirected high-pass corona, and ``k = 1..K(j)`` running once around
the plane, so that wedge ``k + K(j)/2`` is the point reflection of wedge
``k``.  For a real image those two wedges carry conjugate coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Iterator, List, Tuple

import numpy as np

from .errors import DimensionError, ParameterError, StructureError

WedgeKey = Tuple[int, int]

MIN_SIZE = 32
DEFAULT_ORIENTATIONS = 16

# Half-width of an angular transition, in units of one wedge.  0.5 makes
# neighbouring wedges overlap over their whole width (no flat top).
_ANGULAR_OVERLAP = 0.5


@dataclass(frozen=True)
class CurveletParams:
    """Geometry of a curvelet transform for one image size.

    Attributes
    ----------
    height, width : int
        Image size in pixels.
    scales : int
        Total number of scales ``J`` (>= 3), coarsest and finest included.
    orientations_coarse : int
        Number of orientations ``K2`` at scale 2, a positive multiple of 4.
    """

    height: int
    width: int
    scales: int
    orientations_coarse: int = DEFAULT_ORIENTATIONS

    def __post_init__(self):
        if min(self.height, self.width) < MIN_SIZE:
            raise ParameterError(
                f"image {self.height}x{self.width} is smaller than {MIN_SIZE}x{MIN_SIZE}"
            )
        if self.scales < 3:
            raise ParameterError(f"scales must be >= 3, got {self.scales}")
        if self.orientations_coarse <= 0 or self.orientations_coarse % 4:
            raise ParameterError(
                f"orientations_coarse must be a positive multiple of 4, "
                f"got {self.orientations_coarse}"
            )
        # the low-pass plateau must cover at least one frequency sample
        if min(self.height, self.width) < 6 * 2 ** (self.scales - 2):
            raise ParameterError(
                f"{self.scales} scales is too many for a "
                f"{self.height}x{self.width} image"
            )

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.height, self.width)

    def orientations(self, scale: int) -> int:
        """Number of wedges ``K(j)`` at ``scale``."""
        if not 1 <= scale <= self.scales:
            raise ParameterError(f"scale {scale} outside 1..{self.scales}")
        if scale == 1 or scale == self.scales:
            return 1
        return self.orientations_coarse * 2 ** math.ceil((scale - 2) / 2)

    def wedge_keys(self) -> List[WedgeKey]:
        """All ``(scale, orientation)`` pairs, scale-major."""
        return [
            (j, k)
            for j in range(1, self.scales + 1)
            for k in range(1, self.orientations(j) + 1)
        ]

    def is_directional(self, scale: int) -> bool:
        return 1 < scale < self.scales


def make_params(
    height: int,
    width: int,
    scales: int | None = None,
    orientations_coarse: int | None = None,
) -> CurveletParams:
    """Build transform parameters, filling in defaults.

    The default scale count is ``ceil(log2(min(height, width))) - 3``,
    raised to 3 for images too small to reach that.
    """
    if min(height, width) < MIN_SIZE:
        raise ParameterError(
            f"image {height}x{width} is smaller than {MIN_SIZE}x{MIN_SIZE}"
        )
    if scales is None:
        scales = max(3, math.ceil(math.log2(min(height, width))) - 3)
    if orientations_coarse is None:
        orientations_coarse = DEFAULT_ORIENTATIONS
    return CurveletParams(int(height), int(width), int(scales), int(orientations_coarse))


@dataclass
class CurveletDecomposition:
    """Curvelet coefficients of one image.

    ``wedges`` maps ``(scale, orientation)`` to a complex coefficient matrix.
    """

    params: CurveletParams
    wedges: Dict[WedgeKey, np.ndarray] = field(default_factory=dict)

    @property
    def image_height(self) -> int:
        return self.params.height

    @property
    def image_width(self) -> int:
        return self.params.width

    def __getitem__(self, key: WedgeKey) -> np.ndarray:
        return self.wedges[key]

    def __iter__(self) -> Iterator[WedgeKey]:
        return iter(self.params.wedge_keys())

    def energies(self) -> Dict[WedgeKey, float]:
        return {key: float(np.sum(np.abs(c) ** 2)) for key, c in self.wedges.items()}

    def total_energy(self) -> float:
        return float(sum(self.energies().values()))


# ---------------------------------------------------------------------------
# windows


def smooth_pair(t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Rising and falling steps on [0, 1] with ``rise**2 + fall**2 == 1``.

    Built from ``nu(t) = sin(pi t / 2)**2``; ``t`` is clipped to [0, 1].
    """
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    rise = np.sin(0.5 * np.pi * t) ** 2
    fall = np.cos(0.5 * np.pi * t) ** 2
    norm = np.sqrt(rise**2 + fall**2)
    rise, fall = rise / norm, fall / norm
    # exact zeros outside the transition; cos(pi/2) is not 0 in floating point
    rise[t <= 0.0], fall[t <= 0.0] = 0.0, 1.0
    rise[t >= 1.0], fall[t >= 1.0] = 1.0, 0.0
    return rise, fall


def _lowpass_profile(x: np.ndarray, plateau: float) -> np.ndarray:
    # 1 on |x| <= plateau, smooth decay to 0 at |x| = 2 * plateau
    _, fall = smooth_pair((np.abs(x) - plateau) / plateau)
    return fall


def _lowpass(u: np.ndarray, v: np.ndarray, plateau: float) -> np.ndarray:
    return np.outer(_lowpass_profile(u, plateau), _lowpass_profile(v, plateau))


def _cone_coordinates(u: np.ndarray, v: np.ndarray, per_cone: int):
    """Split the plane into four cones and a position inside each.

    Returns integer cone ids (0 top, 1 left, 2 bottom, 3 right, walking
    counter-clockwise) and a local coordinate in ``[0, per_cone]``.  The
    local coordinate is bitwise identical for a point and its reflection,
    whose cone id differs by exactly 2.
    """
    y, x = np.meshgrid(u, v, indexing="ij")
    ay, ax = np.abs(y), np.abs(x)
    vertical = ay >= ax
    cone = np.empty(y.shape, dtype=np.int64)
    local = np.zeros(y.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        top = vertical & (y > 0)
        bottom = vertical & (y < 0)
        left = ~vertical & (x < 0)
        right = ~vertical & (x > 0)
        cone[top], cone[bottom], cone[left], cone[right] = 0, 2, 1, 3
        local[top] = 0.5 * per_cone * (1.0 - x[top] / y[top])
        local[bottom] = 0.5 * per_cone * (1.0 + x[bottom] / -y[bottom])
        local[left] = 0.5 * per_cone * (1.0 - y[left] / -x[left])
        local[right] = 0.5 * per_cone * (1.0 + y[right] / x[right])
    # origin: lies outside every directional corona, value is irrelevant
    cone[vertical & (y == 0)] = 0
    return cone, local


def _angular_window(cone: np.ndarray, local: np.ndarray, wedge: int, per_cone: int) -> np.ndarray:
    total = 4 * per_cone
    base = np.mod(cone * per_cone - wedge + 2 * per_cone, total) - 2 * per_cone
    d = base + local
    width = 2 * _ANGULAR_OVERLAP
    rise, _ = smooth_pair((d + _ANGULAR_OVERLAP) / width)
    _, fall = smooth_pair((d - 1.0 + _ANGULAR_OVERLAP) / width)
    window = np.where(d < _ANGULAR_OVERLAP, rise, np.where(d > 1.0 - _ANGULAR_OVERLAP, fall, 1.0))
    window[(d <= -_ANGULAR_OVERLAP) | (d >= 1.0 + _ANGULAR_OVERLAP)] = 0.0
    return window


def _even_up(n: int) -> int:
    return n + (n % 2)


@dataclass(frozen=True)
class _Wedge:
    support: np.ndarray  # flat indices into the image spectrum
    window: np.ndarray  # window values on the support
    wrapped: np.ndarray  # flat indices into the wrapped rectangle
    shape: Tuple[int, int]


def _wrap_rectangle(rows: np.ndarray, cols: np.ndarray, primary: int | None) -> Tuple[int, int]:
    """Smallest even rectangle into which the support periodizes injectively.

    ``primary=None`` uses the bounding box.  Otherwise the span along the
    primary axis sets one side and the largest span of the other axis
    within a single primary line sets the other.
    """
    if primary is None:
        return (_even_up(int(np.ptp(rows)) + 1), _even_up(int(np.ptp(cols)) + 1))
    lead, other = (rows, cols) if primary == 0 else (cols, rows)
    order = np.lexsort((other, lead))
    lead, other = lead[order], other[order]
    starts = np.flatnonzero(np.r_[True, lead[1:] != lead[:-1]])
    lo = np.minimum.reduceat(other, starts)
    hi = np.maximum.reduceat(other, starts)
    lead_len = _even_up(int(lead[-1] - lead[0]) + 1)
    other_len = _even_up(int(np.max(hi - lo)) + 1)
    return (lead_len, other_len) if primary == 0 else (other_len, lead_len)


def _make_wedge(window: np.ndarray, freqs: Tuple[np.ndarray, np.ndarray], primary: int | None) -> _Wedge:
    support = np.flatnonzero(window > 0.0)
    r_idx, c_idx = np.unravel_index(support, window.shape)
    rows, cols = freqs[0][r_idx], freqs[1][c_idx]
    shape = _wrap_rectangle(rows, cols, primary)
    wrapped = np.mod(rows, shape[0]) * shape[1] + np.mod(cols, shape[1])
    values = window.ravel()[support]
    for arr in (support, values, wrapped):
        arr.setflags(write=False)
    return _Wedge(support, values, wrapped, shape)


@lru_cache(maxsize=16)
def _plan(params: CurveletParams) -> Dict[WedgeKey, _Wedge]:
    """Window geometry for ``params``; immutable and shared between calls."""
    n1, n2 = params.shape
    J = params.scales
    u, v = np.fft.fftfreq(n1), np.fft.fftfreq(n2)
    freqs = (np.rint(u * n1).astype(np.int64), np.rint(v * n2).astype(np.int64))

    # low-pass squares, plateau half-width 1/6 at level J-1, halving inwards
    lowpasses = {level: _lowpass(u, v, 2.0 ** (level - J) / 3.0) for level in range(1, J)}

    plan: Dict[WedgeKey, _Wedge] = {(1, 1): _make_wedge(lowpasses[1], freqs, None)}
    for j in range(2, J):
        radial = np.sqrt(np.clip(lowpasses[j] ** 2 - lowpasses[j - 1] ** 2, 0.0, None))
        per_cone = params.orientations(j) // 4
        cone, local = _cone_coordinates(u, v, per_cone)
        for m in range(4 * per_cone):
            window = radial * _angular_window(cone, local, m, per_cone)
            primary = 0 if (m // per_cone) % 2 == 0 else 1
            plan[(j, m + 1)] = _make_wedge(window, freqs, primary)
    highpass = np.sqrt(np.clip(1.0 - lowpasses[J - 1] ** 2, 0.0, None))
    plan[(J, 1)] = _make_wedge(highpass, freqs, None)
    return plan


def wrap_shapes(params: CurveletParams) -> Dict[WedgeKey, Tuple[int, int]]:
    """Coefficient matrix shape of every wedge."""
    return {key: w.shape for key, w in _plan(params).items()}


def window_energy(params: CurveletParams) -> np.ndarray:
    """Sum of squared windows over all wedges; equal to 1 everywhere."""
    total = np.zeros(params.height * params.width)
    for w in _plan(params).values():
        total[w.support] += w.window**2
    return total.reshape(params.shape)


# ---------------------------------------------------------------------------
# transforms


def forward(image: np.ndarray, params: CurveletParams | None = None) -> CurveletDecomposition:
    """Curvelet coefficients of a 2-D image.

    Parameters
    ----------
    image : ndarray, shape (height, width)
        Real (or complex) image.
    params : CurveletParams, optional
        Defaults to ``make_params(*image.shape)``.
    """
    image = np.asarray(image)
    if image.ndim != 2:
        raise DimensionError(f"expected a 2-D image, got shape {image.shape}")
    if params is None:
        params = make_params(*image.shape)
    if image.shape != params.shape:
        raise DimensionError(f"image shape {image.shape} does not match params {params.shape}")

    spectrum = (np.fft.fft2(image) / math.sqrt(image.size)).ravel()
    wedges = {}
    for key, w in _plan(params).items():
        buf = np.zeros(w.shape[0] * w.shape[1], dtype=complex)
        buf[w.wrapped] = w.window * spectrum[w.support]
        wedges[key] = np.fft.ifft2(buf.reshape(w.shape)) * math.sqrt(buf.size)
    return CurveletDecomposition(params, wedges)


def inverse(decomposition: CurveletDecomposition, real: bool = True) -> np.ndarray:
    """Reconstruct the image from its curvelet coefficients (adjoint of forward)."""
    params = decomposition.params
    plan = _plan(params)
    if set(decomposition.wedges) != set(plan):
        missing = sorted(set(plan) - set(decomposition.wedges))
        extra = sorted(set(decomposition.wedges) - set(plan))
        raise StructureError(f"wedge set mismatch: missing {missing[:5]}, unexpected {extra[:5]}")

    spectrum = np.zeros(params.height * params.width, dtype=complex)
    for key, w in plan.items():
        coeffs = np.asarray(decomposition.wedges[key])
        if coeffs.shape != w.shape:
            raise StructureError(f"wedge {key} has shape {coeffs.shape}, expected {w.shape}")
        wrapped = np.fft.fft2(coeffs).ravel() / math.sqrt(coeffs.size)
        spectrum[w.support] += w.window * wrapped[w.wrapped]
    image = np.fft.ifft2(spectrum.reshape(params.shape)) * math.sqrt(spectrum.size)
    return image.real if real else image
