"""Edge-preserving smoothness penalties: Huber and Tukey families.

Both families are driven by a gradient-magnitude threshold.  Below it the
penalty is quadratic (isotropic smoothing); above it Huber grows linearly
(total-variation behaviour) while Tukey saturates, so Tukey stops diffusing
across strong edges entirely.  The threshold can be fixed or derived from
the image at hand (see :func:`adaptive_threshold`).
"""

from __future__ import annotations

import dataclasses
import enum
import math
import warnings

import numpy as np

from .grid import GradientField, ImageGrid, divergence, gradient

# Tukey threshold relative to the Huber one, so both penalties switch
# behaviour at the same gradient magnitude.
TUKEY_SCALE = math.sqrt(5.0)


class RegKind(enum.Enum):
    HUBER = "huber"
    TUKEY = "tukey"


@dataclasses.dataclass(frozen=True)
class RegularizerSpec:
    """Penalty family plus switching threshold.

    ``threshold`` of None means "adaptive": callers resolve it per image via
    :meth:`resolve`, which applies the Tukey scaling automatically.  All
    evaluation functions require a concrete (resolved) spec or an image to
    resolve against.
    """

    kind: RegKind
    threshold: float | None = None

    def __post_init__(self):
        if self.threshold is not None:
            if not math.isfinite(self.threshold) or self.threshold <= 0:
                raise ValueError("threshold must be finite and > 0")

    @property
    def is_adaptive(self) -> bool:
        return self.threshold is None

    def resolve(self, image: ImageGrid) -> "RegularizerSpec":
        """Concrete spec with the threshold derived from ``image`` if adaptive."""
        if self.threshold is not None:
            return self
        t = adaptive_threshold(image)
        if self.kind is RegKind.TUKEY:
            t *= TUKEY_SCALE
        return RegularizerSpec(self.kind, t)


def adaptive_threshold(image: ImageGrid) -> float:
    """Resolution-dependent switching threshold h^3 * sum |grad m|.

    This is the mean gradient magnitude over the unit square scaled by the
    cell width, so it shrinks under refinement and scales linearly with
    image contrast.  A flat image would give zero, which blows up the
    lagged-diffusivity coefficient; in that case the value is floored at
    1e-8 * max(1, max|m|) and a warning is emitted.
    """
    mag = gradient(image).magnitude()
    value = image.h ** 3 * float(mag.sum())
    floor = 1e-8 * max(1.0, float(np.abs(image.values).max()))
    if value < floor:
        warnings.warn(
            "image is (nearly) flat; smoothing threshold floored at "
            f"{floor:.3e}",
            stacklevel=2,
        )
        return floor
    return value


def _concrete(spec: RegularizerSpec) -> float:
    if spec.threshold is None:
        raise ValueError("adaptive spec must be resolved against an image first")
    return spec.threshold


def rho(spec: RegularizerSpec, sigma):
    """Penalty density as a function of gradient magnitude (scalar or array)."""
    s = np.abs(np.asarray(sigma, dtype=np.float64))
    t = _concrete(spec)
    if spec.kind is RegKind.HUBER:
        out = np.where(s >= t, s, s * s / (2.0 * t) + t / 2.0)
    else:
        u = (s / t) ** 2
        out = np.where(s >= t, 1.0 / 3.0, u - u * u + u * u * u / 3.0)
    return float(out) if np.ndim(sigma) == 0 else out


def rho_prime(spec: RegularizerSpec, sigma):
    """Derivative of :func:`rho` (the influence function)."""
    s = np.abs(np.asarray(sigma, dtype=np.float64))
    t = _concrete(spec)
    if spec.kind is RegKind.HUBER:
        out = np.where(s >= t, 1.0, s / t)
    else:
        out = np.where(s >= t, 0.0, 2.0 * s / t ** 2 * (1.0 - (s / t) ** 2) ** 2)
    return float(out) if np.ndim(sigma) == 0 else out


def edge_stop(spec: RegularizerSpec, sigma):
    """Diffusion coefficient g = rho'(sigma)/sigma; finite at sigma = 0.

    Huber gives 1/max(threshold, sigma); Tukey redescends to exactly zero
    at and beyond its threshold, which is what lets it leave strong edges
    untouched.
    """
    s = np.abs(np.asarray(sigma, dtype=np.float64))
    t = _concrete(spec)
    if spec.kind is RegKind.HUBER:
        out = 1.0 / np.maximum(t, s)
    else:
        out = np.where(s >= t, 0.0, 2.0 / t ** 2 * (1.0 - (s / t) ** 2) ** 2)
    return float(out) if np.ndim(sigma) == 0 else out


def edge_stop_field(image: ImageGrid, spec: RegularizerSpec) -> np.ndarray:
    """Node-centered diffusion coefficient g(|grad m|) for ``image``."""
    spec = spec.resolve(image)
    return edge_stop(spec, gradient(image).magnitude())


def diffusion_apply(coeff: np.ndarray, v: ImageGrid) -> ImageGrid:
    """Apply v -> -div(coeff * grad v) with node-centered coefficients.

    Linear and symmetric positive semidefinite in v for any nonnegative
    coefficient field, with constants in the null space.
    """
    g = gradient(v)
    flux = GradientField(coeff * g.gx, coeff * g.gy)
    return ImageGrid(-divergence(flux).values)


def reg_value(image: ImageGrid, spec: RegularizerSpec) -> float:
    """Penalty value h^2 * sum rho(|grad m|) (unit-square quadrature)."""
    spec = spec.resolve(image)
    mag = gradient(image).magnitude()
    return image.h ** 2 * float(rho(spec, mag).sum())


def reg_gradient(image: ImageGrid, spec: RegularizerSpec) -> ImageGrid:
    """Variational gradient -div(g(|grad m|) grad m) of the penalty.

    Exact gradient of :func:`reg_value` up to the h^2 quadrature weight:
    d/dt reg_value(m + t v) = h^2 * <reg_gradient(m), v>.  For the Huber
    family this coincides with :func:`apply_lagged_diffusion` at m itself.
    """
    spec = spec.resolve(image)
    g = gradient(image)
    coeff = edge_stop(spec, g.magnitude())
    flux = GradientField(coeff * g.gx, coeff * g.gy)
    return ImageGrid(-divergence(flux).values)


def apply_lagged_diffusion(
    frozen: ImageGrid, v: ImageGrid, spec: RegularizerSpec
) -> ImageGrid:
    """Apply the diffusion operator with coefficients frozen at ``frozen``.

    This is the linear operator used by the reweighted (lagged-diffusivity)
    iteration; it is defined for the Huber family only, whose coefficient
    is 1/max(threshold, |grad m|).
    """
    if spec.kind is not RegKind.HUBER:
        raise ValueError("lagged diffusion operator is defined for the Huber family only")
    if frozen.side != v.side:
        raise ValueError(f"lattice mismatch: {frozen.side} vs {v.side}")
    return diffusion_apply(edge_stop_field(frozen, spec), v)
