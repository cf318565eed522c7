"""Discrete image lattice: grid types, differential operators, norms, noise.

Images live on a square (n+1) x (n+1) node lattice discretizing the unit
square with cell width h = 1/n.  Intensities are stored as float64 in the
nominal [0, 255] convention; quantization happens only at file output.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np


@dataclasses.dataclass(frozen=True)
class ImageGrid:
    """Square lattice of real-valued intensities.

    ``side`` is the node count per dimension (n+1); the cell width is
    h = 1/n.  The wrapped array is treated as read-only by every operation
    in this package; callers must not mutate it in place.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"image must be a square 2D array, got shape {v.shape}")
        if v.shape[0] < 2:
            raise ValueError("image side must be at least 2 nodes")
        object.__setattr__(self, "values", v)

    @property
    def side(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        """Number of cells per dimension (side - 1)."""
        return self.side - 1

    @property
    def h(self) -> float:
        """Cell width of the unit-square discretization."""
        return 1.0 / self.n


@dataclasses.dataclass(frozen=True)
class GradientField:
    """Per-node forward-difference 2-vector field (intensity per unit length).

    The trailing column of ``gx`` and trailing row of ``gy`` are zero under
    the one-sided (replicate) boundary rule.
    """

    gx: np.ndarray
    gy: np.ndarray

    def __post_init__(self):
        gx = np.asarray(self.gx, dtype=np.float64)
        gy = np.asarray(self.gy, dtype=np.float64)
        if gx.shape != gy.shape or gx.ndim != 2 or gx.shape[0] != gx.shape[1]:
            raise ValueError("gradient components must be equal square 2D arrays")
        object.__setattr__(self, "gx", gx)
        object.__setattr__(self, "gy", gy)

    @property
    def side(self) -> int:
        return self.gx.shape[0]

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.gx, self.gy)


@dataclasses.dataclass(frozen=True)
class NoiseSpec:
    """Additive white Gaussian noise level, as a percentage of image RMS."""

    eta_percent: float
    seed: int = 0

    def __post_init__(self):
        if not math.isfinite(self.eta_percent) or self.eta_percent < 0:
            raise ValueError("eta_percent must be finite and >= 0")


def _check_same_lattice(a: ImageGrid, b: ImageGrid) -> None:
    if a.side != b.side:
        raise ValueError(f"lattice mismatch: {a.side} vs {b.side}")


def gradient(image: ImageGrid) -> GradientField:
    """Forward-difference gradient with replicate closure.

    gx[i, j] = (m[i, j+1] - m[i, j]) / h for j < n and zero on the last
    column; gy analogously in the row direction.
    """
    v = image.values
    h = image.h
    gx = np.zeros_like(v)
    gy = np.zeros_like(v)
    gx[:, :-1] = (v[:, 1:] - v[:, :-1]) / h
    gy[:-1, :] = (v[1:, :] - v[:-1, :]) / h
    return GradientField(gx, gy)


def divergence(field: GradientField) -> ImageGrid:
    """Discrete divergence, the exact negative adjoint of :func:`gradient`.

    Satisfies <gradient(m), p> = -<m, divergence(p)> for all m, p on the
    same lattice, which makes -div(g grad .) symmetric positive
    semidefinite for any nonnegative coefficient field g.
    """
    gx, gy = field.gx, field.gy
    h = 1.0 / (field.side - 1)
    out = np.zeros_like(gx)
    out[:, :-1] += gx[:, :-1]
    out[:, 1:] -= gx[:, :-1]
    out[:-1, :] += gy[:-1, :]
    out[1:, :] -= gy[:-1, :]
    return ImageGrid(out / h)


def relative_error(m_next: ImageGrid, m_prev: ImageGrid) -> float:
    """Iterate-to-iterate change ||m_next - m_prev|| / ||m_next||."""
    _check_same_lattice(m_next, m_prev)
    denom = float(np.linalg.norm(m_next.values))
    if denom == 0.0:
        raise ZeroDivisionError("relative error undefined for a zero image")
    return float(np.linalg.norm(m_next.values - m_prev.values)) / denom

def misfit(image: ImageGrid, data: ImageGrid) -> float:
    """Data discrepancy ||m - b|| / n; estimates the per-pixel noise level."""
    _check_same_lattice(image, data)
    return float(np.linalg.norm(image.values - data.values)) / image.n


def psnr(image: ImageGrid, reference: ImageGrid, peak: float = 255.0) -> float:
    """Peak signal-to-noise ratio in dB against a reference image."""
    _check_same_lattice(image, reference)
    mse = float(np.mean((image.values - reference.values) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def add_gaussian_noise(image: ImageGrid, spec: NoiseSpec) -> ImageGrid:
    """Corrupt an image with zero-mean i.i.d. Gaussian noise.

    The standard deviation is (eta_percent/100) * RMS(image), so
    ``misfit(noisy, image)`` concentrates near that value.  Deterministic
    for a fixed (spec, image) pair.
    """
    if spec.eta_percent == 0.0:
        return image
    sigma = spec.eta_percent / 100.0 * float(np.linalg.norm(image.values)) / image.side
    rng = np.random.default_rng(spec.seed)
    noise = rng.normal(0.0, sigma, size=image.values.shape)
    return ImageGrid(image.values + noise)
