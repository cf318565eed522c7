"""Point spread functions and the FFT-based circulant blur operator.

Kernels are synthesized in the spatial domain, periodically embedded with
the kernel origin wrapped to index (0, 0), and applied through the 2D DFT:
pointwise spectral multiplication equals circular convolution, so the fast
path is exactly the dense circulant matrix-vector product (``direct_convolve``
provides the O(N * k^2) oracle for cross-checking).
"""

from __future__ import annotations

import dataclasses
import enum
import math
from pathlib import Path

import numpy as np

from .grid import ImageGrid


class PsfKind(enum.Enum):
    MOTION = "motion"
    LOG = "log"
    DISK = "disk"
    UNSHARP = "unsharp"
    GAUSSIAN = "gaussian"
    LAPLACIAN = "laplacian"
    DELTA = "delta"
    CUSTOM = "custom"


@dataclasses.dataclass(frozen=True)
class PsfKernel:
    """Spatial-domain convolution kernel with an explicit origin tap."""

    taps: np.ndarray
    center: tuple[int, int]
    kind: PsfKind

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.float64)
        if taps.ndim != 2 or taps.size == 0:
            raise ValueError("kernel taps must form a non-empty 2D array")
        if not np.all(np.isfinite(taps)):
            raise ValueError("kernel taps must be finite")
        ci, cj = self.center
        if not (0 <= ci < taps.shape[0] and 0 <= cj < taps.shape[1]):
            raise ValueError(f"center {self.center} outside kernel of shape {taps.shape}")
        object.__setattr__(self, "taps", taps)


@dataclasses.dataclass(frozen=True)
class TransferFunction:
    """Frequency-domain embedding of a PSF on a given lattice."""

    side: int
    spectrum: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.spectrum, dtype=np.complex128)
        if s.shape != (self.side, self.side):
            raise ValueError("spectrum shape must match the lattice side")
        object.__setattr__(self, "spectrum", s)


def _odd_window(requested: int | None, sigma: float) -> int:
    """Odd window size covering +-8 sigma; truncated mass is below 1e-14."""
    cap = 2 * math.ceil(8.0 * sigma) + 1
    if requested is None:
        return cap
    if requested < 1:
        raise ValueError("window size must be >= 1")
    size = min(int(requested), cap)
    return size if size % 2 == 1 else size - 1


def _centered_coords(size: int) -> tuple[np.ndarray, np.ndarray]:
    half = (size - 1) // 2
    axis = np.arange(size, dtype=np.float64) - half
    return np.meshgrid(axis, axis, indexing="xy")


def gaussian_psf(hsize: int | None = None, sigma: float = 0.5) -> PsfKernel:
    """Rotationally symmetric Gaussian low-pass filter, taps summing to 1."""
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    size = _odd_window(hsize, sigma)
    x, y = _centered_coords(size)
    taps = np.exp(-(x * x + y * y) / (2.0 * sigma * sigma))
    taps /= taps.sum()
    c = (size - 1) // 2
    return PsfKernel(taps, (c, c), PsfKind.GAUSSIAN)


def log_psf(hsize: int | None = None, sigma: float = 0.5) -> PsfKernel:
    """Laplacian-of-Gaussian filter, mean-subtracted to sum exactly to zero."""
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    size = _odd_window(hsize, sigma)
    x, y = _centered_coords(size)
    r2 = x * x + y * y
    gauss = np.exp(-r2 / (2.0 * sigma * sigma))
    taps = gauss / gauss.sum() * (r2 - 2.0 * sigma * sigma) / sigma ** 4
    taps -= taps.mean()
    c = (size - 1) // 2
    return PsfKernel(taps, (c, c), PsfKind.LOG)


def disk_psf(radius: float = 5.0) -> PsfKernel:
    """Circular mean filter; per-pixel disk coverage via 16x16 supersampling."""
    if radius <= 0:
        raise ValueError("radius must be > 0")
    half = math.ceil(radius)
    size = 2 * half + 1
    sub = 16
    # Sub-pixel sample offsets within [-0.5, 0.5).
    offsets = (np.arange(sub) + 0.5) / sub - 0.5
    axis = np.arange(size, dtype=np.float64) - half
    fine = (axis[:, None] + offsets[None, :]).ravel()
    inside = (fine[:, None] ** 2 + fine[None, :] ** 2) <= radius * radius
    coverage = inside.reshape(size, sub, size, sub).sum(axis=(1, 3)).astype(np.float64)
    taps = coverage / coverage.sum()
    return PsfKernel(taps, (half, half), PsfKind.DISK)


def motion_psf(length: float = 9.0, theta_deg: float = 0.0) -> PsfKernel:
    """Linear camera-motion filter: a width-1 segment of the given length.

    Taps are proportional to max(0, 1 - distance to the centered segment at
    ``theta_deg`` counterclockwise from horizontal), normalized to sum 1.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    half = (length - 1) / 2.0
    theta = math.radians(theta_deg)
    dx, dy = math.cos(theta), math.sin(theta)
    ext_x = math.ceil(half * abs(dx) + 1.0)
    ext_y = math.ceil(half * abs(dy) + 1.0)
    cols, rows = 2 * ext_x + 1, 2 * ext_y + 1
    jj, ii = np.meshgrid(np.arange(cols), np.arange(rows), indexing="xy")
    x = jj - ext_x
    y = -(ii - ext_y)  # image rows increase downward
    # Distance from each tap to the nearest point of the segment.
    t = np.clip(x * dx + y * dy, -half, half)
    dist = np.hypot(x - t * dx, y - t * dy)
    taps = np.maximum(0.0, 1.0 - dist)
    taps, center = _trim_zero_border(taps, (ext_y, ext_x))
    taps /= taps.sum()
    return PsfKernel(taps, center, PsfKind.MOTION)


def _trim_zero_border(taps: np.ndarray, center: tuple[int, int]):
    nz_rows = np.flatnonzero(taps.any(axis=1))
    nz_cols = np.flatnonzero(taps.any(axis=0))
    r0, r1 = nz_rows[0], nz_rows[-1] + 1
    c0, c1 = nz_cols[0], nz_cols[-1] + 1
    return taps[r0:r1, c0:c1].copy(), (center[0] - r0, center[1] - c0)


def unsharp_psf(alpha: float = 0.2) -> PsfKernel:
    """3x3 unsharp contrast-enhancement filter, taps summing to 1."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    a = alpha
    taps = np.array(
        [[-a, a - 1.0, -a], [a - 1.0, a + 5.0, a - 1.0], [-a, a - 1.0, -a]]
    ) / (a + 1.0)
    return PsfKernel(taps, (1, 1), PsfKind.UNSHARP)


def laplacian_psf(alpha: float = 0.2) -> PsfKernel:
    """3x3 discrete Laplacian filter, taps summing to 0."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must be in [0, 1]")
    a = alpha
    taps = (
        np.array(
            [
                [a / 4.0, (1.0 - a) / 4.0, a / 4.0],
                [(1.0 - a) / 4.0, -1.0, (1.0 - a) / 4.0],
                [a / 4.0, (1.0 - a) / 4.0, a / 4.0],
            ]
        )
        * 4.0
        / (a + 1.0)
    )
    return PsfKernel(taps, (1, 1), PsfKind.LAPLACIAN)


def delta_psf() -> PsfKernel:
    """Identity kernel."""
    return PsfKernel(np.ones((1, 1)), (0, 0), PsfKind.DELTA)


def custom_psf(taps, center: tuple[int, int] | None = None) -> PsfKernel:
    taps = np.atleast_2d(np.asarray(taps, dtype=np.float64))
    if center is None:
        center = ((taps.shape[0] - 1) // 2, (taps.shape[1] - 1) // 2)
    return PsfKernel(taps, center, PsfKind.CUSTOM)


_GENERATORS = {
    PsfKind.MOTION: motion_psf,
    PsfKind.LOG: log_psf,
    PsfKind.DISK: disk_psf,
    PsfKind.UNSHARP: unsharp_psf,
    PsfKind.GAUSSIAN: gaussian_psf,
    PsfKind.LAPLACIAN: laplacian_psf,
    PsfKind.DELTA: delta_psf,
}


def make_psf(kind: PsfKind | str, **params) -> PsfKernel:
    """Dispatch to the named generator; see the individual *_psf functions."""
    kind = PsfKind(kind) if not isinstance(kind, PsfKind) else kind
    if kind is PsfKind.CUSTOM:
        return custom_psf(**params)
    return _GENERATORS[kind](**params)


def parse_psf_spec(text: str) -> PsfKernel:
    """Parse the compact ``type:param1:param2`` syntax used by CLI and service.

    Forms: ``motion:LEN:THETA``, ``log:SIGMA`` or ``log:HSIZE:SIGMA``,
    ``gaussian:SIGMA`` or ``gaussian:HSIZE:SIGMA``, ``disk:RADIUS``,
    ``unsharp:ALPHA``, ``laplacian:ALPHA``, ``delta``, ``file:PATH``.
    """
    parts = text.split(":")
    name, args = parts[0].lower(), parts[1:]
    if name == "file":
        if len(args) != 1:
            raise ValueError("expected file:PATH")
        return load_psf_text(args[0])
    if name == "delta":
        if args:
            raise ValueError("delta takes no parameters")
        return delta_psf()
    if name == "motion":
        if len(args) != 2:
            raise ValueError("expected motion:LEN:THETA")
        return motion_psf(float(args[0]), float(args[1]))
    if name == "disk":
        if len(args) != 1:
            raise ValueError("expected disk:RADIUS")
        return disk_psf(float(args[0]))
    if name in ("gaussian", "log"):
        fn = gaussian_psf if name == "gaussian" else log_psf
        if len(args) == 1:
            return fn(None, float(args[0]))
        if len(args) == 2:
            return fn(int(args[0]), float(args[1]))
        raise ValueError(f"expected {name}:SIGMA or {name}:HSIZE:SIGMA")
    if name in ("unsharp", "laplacian"):
        fn = unsharp_psf if name == "unsharp" else laplacian_psf
        if len(args) != 1:
            raise ValueError(f"expected {name}:ALPHA")
        return fn(float(args[0]))
    raise ValueError(f"unknown PSF type {name!r}")


def embed(psf: PsfKernel, side: int) -> TransferFunction:
    """Periodically embed a kernel on a side x side lattice and take its DFT.

    The kernel origin lands at index (0, 0) via periodic wrap, so a delta
    kernel yields a spectrum of all ones.
    """
    rows, cols = psf.taps.shape
    if rows > side or cols > side:
        raise ValueError(
            f"kernel of shape {psf.taps.shape} does not fit a side-{side} lattice"
        )
    ext = np.zeros((side, side))
    ci, cj = psf.center
    ii = (np.arange(rows) - ci) % side
    jj = (np.arange(cols) - cj) % side
    np.add.at(ext, (ii[:, None], jj[None, :]), psf.taps)
    return TransferFunction(side, np.fft.fft2(ext))


def forward_map(image: ImageGrid, tf: TransferFunction) -> ImageGrid:
    """Apply the blur operator: circular convolution via the FFT."""
    if image.side != tf.side:
        raise ValueError(f"lattice mismatch: image {image.side} vs transfer {tf.side}")
    out = np.fft.ifft2(np.fft.fft2(image.values) * tf.spectrum).real
    return ImageGrid(out)


def adjoint_map(residual: ImageGrid, tf: TransferFunction) -> ImageGrid:
    """Apply the exact adjoint of :func:`forward_map` (conjugate spectrum)."""
    if residual.side != tf.side:
        raise ValueError(f"lattice mismatch: image {residual.side} vs transfer {tf.side}")
    out = np.fft.ifft2(np.fft.fft2(residual.values) * np.conj(tf.spectrum)).real
    return ImageGrid(out)


def direct_convolve(image: ImageGrid, psf: PsfKernel) -> ImageGrid:
    """Dense periodic convolution oracle (small lattices only)."""
    v = image.values
    out = np.zeros_like(v)
    ci, cj = psf.center
    for a in range(psf.taps.shape[0]):
        for b in range(psf.taps.shape[1]):
            w = psf.taps[a, b]
            if w == 0.0:
                continue
            out += w * np.roll(v, shift=(a - ci, b - cj), axis=(0, 1))
    return ImageGrid(out)


def save_psf_text(psf: PsfKernel, path) -> None:
    """Write taps as a plain-text matrix, one row per line."""
    lines = [" ".join(f"{x:.17g}" for x in row) for row in psf.taps]
    Path(path).write_text("\n".join(lines) + "\n")


def load_psf_text(path) -> PsfKernel:
    """Read a plain-text tap matrix; the origin is the central tap."""
    rows = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line:
            rows.append([float(tok) for tok in line.split()])
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise ValueError(f"malformed PSF matrix in {path}")
    return custom_psf(np.array(rows, dtype=np.float64))
