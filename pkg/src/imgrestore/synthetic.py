"""Deterministic synthetic test scenes.

Each builder produces a piecewise-smooth grayscale scene in the [0, 255]
convention with slightly soft edges (as a camera would record them) and an
overall RMS near 120, comparable to classic 8-bit photographic test images.
They are pure functions of the lattice size, so experiments built on them
are exactly reproducible.
"""

from __future__ import annotations

import numpy as np

from .grid import ImageGrid


def _unit_coords(side: int) -> tuple[np.ndarray, np.ndarray]:
    axis = np.linspace(0.0, 1.0, side)
    return np.meshgrid(axis, axis, indexing="xy")


def _soft(distance_px: np.ndarray, width_px: float) -> np.ndarray:
    """Smooth 0..1 step over roughly ``width_px`` pixels."""
    return 0.5 * (1.0 + np.tanh(distance_px / width_px))


def _disk(X, Y, cx, cy, r, side, width_px=1.0):
    d = (r - np.hypot(X - cx, Y - cy)) * (side - 1)
    return _soft(d, width_px)


def _ellipse(X, Y, cx, cy, rx, ry, side, width_px=1.0):
    d = (1.0 - np.hypot((X - cx) / rx, (Y - cy) / ry)) * min(rx, ry) * (side - 1)
    return _soft(d, width_px)


def _halfplane(X, Y, a, b, c, side, width_px=1.0):
    """Soft indicator of a*x + b*y <= c."""
    d = (c - (a * X + b * Y)) / np.hypot(a, b) * (side - 1)
    return _soft(d, width_px)


def _box(X, Y, x0, x1, y0, y1, side, width_px=1.0):
    mask = _halfplane(X, Y, -1, 0, -x0, side, width_px)
    mask = mask * _halfplane(X, Y, 1, 0, x1, side, width_px)
    mask = mask * _halfplane(X, Y, 0, -1, -y0, side, width_px)
    return mask * _halfplane(X, Y, 0, 1, y1, side, width_px)


def synthetic_portrait(side: int = 256) -> ImageGrid:
    """Portrait-like scene: soft face on a graded backdrop with a dark hat."""
    X, Y = _unit_coords(side)
    img = 118.0 + 52.0 * (Y - 0.5) + 9.0 * np.sin(2 * np.pi * (1.2 * X + 0.15))

    img += 54.0 * _ellipse(X, Y, 0.52, 0.52, 0.20, 0.27, side, 1.2)
    img -= 18.0 * _ellipse(X, Y, 0.52, 0.60, 0.10, 0.13, side, 1.6)

    hat = _halfplane(X, Y, 0.45, 1.0, 0.62, side, 1.0) * _halfplane(
        X, Y, -0.45, -1.0, -0.18, side, 1.0
    )
    img -= 58.0 * hat * _ellipse(X, Y, 0.50, 0.30, 0.33, 0.22, side, 1.0)

    brim = _halfplane(X, Y, 0.25, 1.0, 0.47, side, 0.9) * _halfplane(
        X, Y, -0.25, -1.0, -0.41, side, 0.9
    )
    img += 36.0 * brim * _ellipse(X, Y, 0.55, 0.44, 0.42, 0.30, side, 0.9)

    shoulder = _halfplane(X, Y, 0.0, -1.0, -0.80, side, 1.4)
    img -= 34.0 * shoulder
    # Feather-like texture confined to the upper-left quadrant.
    tex_mask = _box(X, Y, 0.02, 0.34, 0.05, 0.55, side, 2.0)
    img += 13.0 * tex_mask * np.sin(2 * np.pi * 7.0 * X) * np.sin(2 * np.pi * 5.0 * Y)

    return ImageGrid(np.clip(img, 0.0, 255.0))


def synthetic_studio(side: int = 256) -> ImageGrid:
    """High-contrast scene: dark figure and tripod against a bright sky."""
    X, Y = _unit_coords(side)
    img = 198.0 - 26.0 * Y - 10.0 * X

    ground = _halfplane(X, Y, 0.0, -1.0, -0.78, side, 1.2)
    img = img * (1.0 - ground) + ground * (
        108.0 + 9.0 * np.sin(2 * np.pi * 6.0 * X) * np.sin(2 * np.pi * 2.0 * (Y - 0.78))
    )

    body = _ellipse(X, Y, 0.40, 0.56, 0.11, 0.24, side, 0.9)
    head = _disk(X, Y, 0.40, 0.30, 0.065, side, 0.9)
    figure = np.maximum(body, head)
    img = img * (1.0 - figure) + figure * 34.0

    camera = _box(X, Y, 0.50, 0.60, 0.34, 0.42, side, 0.8)
    img = img * (1.0 - camera) + camera * 52.0
    for x_leg, slope in ((0.52, 0.02), (0.56, 0.11), (0.60, 0.20)):
        leg = _box(X, Y, x_leg - 0.008, x_leg + 0.008, 0.42, 0.80, side, 0.7)
        leg = leg * _soft(((x_leg + slope * (Y - 0.42)) - X + 0.012) * (side - 1), 0.7)
        img = img * (1.0 - leg) + leg * 40.0

    tower = _box(X, Y, 0.76, 0.81, 0.10, 0.78, side, 0.9)
    img = img * (1.0 - tower) + tower * 148.0
    return ImageGrid(np.clip(img, 0.0, 255.0))


def synthetic_harbor(side: int = 256) -> ImageGrid:
    """Harbor scene: textured water, dark hull, masts and rigging lines."""
    X, Y = _unit_coords(side)
    img = 172.0 - 30.0 * Y + 6.0 * np.sin(2 * np.pi * (0.9 * X + 0.4 * Y))

    water = _halfplane(X, Y, 0.0, -1.0, -0.62, side, 1.1)
    ripples = 11.0 * np.sin(2 * np.pi * (11.0 * Y + 0.8 * np.sin(2 * np.pi * 2.2 * X)))
    img = img * (1.0 - water) + water * (96.0 + ripples + 14.0 * (1.0 - Y))

    hull = _box(X, Y, 0.22, 0.74, 0.50, 0.62, side, 1.0) * _halfplane(
        X, Y, -0.35, 1.0, 0.55, side, 1.0
    )
    img = img * (1.0 - hull) + hull * 52.0
    cabin = _box(X, Y, 0.40, 0.58, 0.42, 0.50, side, 0.9)
    img = img * (1.0 - cabin) + cabin * 140.0

    for x_mast, top in ((0.34, 0.10), (0.52, 0.04), (0.66, 0.16)):
        mast = _box(X, Y, x_mast - 0.006, x_mast + 0.006, top, 0.52, side, 0.7)
        img = img * (1.0 - mast) + mast * 205.0

    rig = _soft((0.004 - np.abs(0.5 * X + 0.35 - Y)) * (side - 1), 0.7)
    rig = rig * _box(X, Y, 0.34, 0.66, 0.0, 0.52, side, 1.5)
    img = img * (1.0 - rig) + rig * 195.0
    return ImageGrid(np.clip(img, 0.0, 255.0))


def synthetic_toy(side: int = 256) -> ImageGrid:
    """Cartoon-like scene: a few smooth bright objects on a plain backdrop."""
    X, Y = _unit_coords(side)
    img = 150.0 - 28.0 * np.hypot(X - 0.5, Y - 0.5)

    ball = _disk(X, Y, 0.34, 0.38, 0.16, side, 1.2)
    shading = 1.0 - 0.35 * np.clip(np.hypot(X - 0.28, Y - 0.32) / 0.16, 0.0, 1.0)
    img = img * (1.0 - ball) + ball * 228.0 * shading

    block = _box(X, Y, 0.56, 0.82, 0.46, 0.74, side, 1.2)
    img = img * (1.0 - block) + block * (66.0 + 40.0 * (X - 0.56) / 0.26)

    ring = _disk(X, Y, 0.62, 0.26, 0.11, side, 1.2) - _disk(
        X, Y, 0.62, 0.26, 0.065, side, 1.2
    )
    ring = np.clip(ring, 0.0, 1.0)
    img = img * (1.0 - ring) + ring * 112.0

    floor = _halfplane(X, Y, 0.0, -1.0, -0.82, side, 1.4)
    img = img * (1.0 - floor) + floor * 95.0
    return ImageGrid(np.clip(img, 0.0, 255.0))


def synthetic_shapes(side: int = 256) -> ImageGrid:
    """Low-contrast scene: a bright disk and a dark block on a gentle dome."""
    X, Y = _unit_coords(side)
    img = 130.0 - 20.0 * np.hypot(X - 0.5, Y - 0.5)
    ball = _disk(X, Y, 0.40, 0.42, 0.17, side, 1.2)
    img = img * (1.0 - ball) + ball * 185.0
    block = _box(X, Y, 0.58, 0.80, 0.50, 0.75, side, 1.2)
    img = img * (1.0 - block) + block * 85.0
    return ImageGrid(np.clip(img, 0.0, 255.0))


def synthetic_plaza(side: int = 256) -> ImageGrid:
    """Deblurring benchmark scene: dark figures on a bright plaza, softly focused.

    The slight optical softening (applied as a small Gaussian blur) mimics a
    photographed scene; the isolated high-contrast figure keeps the restoration
    dynamics in the regime where lagged step policies shine.
    """
    from .blur import embed as _embed, forward_map as _fwd, gaussian_psf as _gauss

    X, Y = _unit_coords(side)
    img = 198.0 - 26.0 * Y - 10.0 * X
    ground = _halfplane(X, Y, 0.0, -1.0, -0.78, side, 1.2)
    img = img * (1.0 - ground) + ground * (
        108.0 + 9.0 * np.sin(2 * np.pi * 6.0 * X) * np.sin(2 * np.pi * 2.0 * (Y - 0.78))
    )
    body = _ellipse(X, Y, 0.40, 0.56, 0.11, 0.24, side, 0.9)
    head = _disk(X, Y, 0.40, 0.30, 0.065, side, 0.9)
    figure = np.maximum(body, head)
    img = img * (1.0 - figure) + figure * 34.0
    camera = _box(X, Y, 0.50, 0.60, 0.34, 0.42, side, 0.8)
    img = img * (1.0 - camera) + camera * 52.0
    for x_leg, slope in ((0.52, 0.02), (0.56, 0.11), (0.60, 0.20)):
        leg = _box(X, Y, x_leg - 0.008, x_leg + 0.008, 0.42, 0.80, side, 0.7)
        leg = leg * _soft(((x_leg + slope * (Y - 0.42)) - X + 0.012) * (side - 1), 0.7)
        img = img * (1.0 - leg) + leg * 40.0
    tower = _box(X, Y, 0.76, 0.81, 0.10, 0.78, side, 0.9)
    img = img * (1.0 - tower) + tower * 148.0
    blob = _disk(X, Y, 0.16, 0.70, 0.08, side, 1.0)
    img = img * (1.0 - blob) + blob * 70.0
    bar = _box(X, Y, 0.05, 0.95, 0.90, 0.95, side, 0.9)
    img = img * (1.0 - bar) + bar * 60.0
    mean = img.mean()
    img = mean + 0.87 * (img - mean)
    grid = ImageGrid(np.clip(img, 0.0, 255.0))
    return _fwd(grid, _embed(_gauss(None, 0.95), side))


def two_level_image(side: int = 64, low: float = 40.0, high: float = 200.0) -> ImageGrid:
    """Exactly piecewise-constant two-level image (a hard vertical edge)."""
    values = np.full((side, side), low)
    values[:, side // 2 :] = high
    return ImageGrid(values)
