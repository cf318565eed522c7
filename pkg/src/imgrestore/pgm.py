"""Binary PGM (P5, 8-bit) image file I/O."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .grid import ImageGrid


class PgmError(ValueError):
    """Base class for PGM parsing failures."""


class MalformedHeaderError(PgmError):
    pass


class UnsupportedMaxvalError(PgmError):
    pass


class TruncatedPayloadError(PgmError):
    pass


def _header_tokens(data: bytes, count: int) -> tuple[list[bytes], int]:
    """Extract whitespace-separated header tokens, skipping # comments."""
    tokens: list[bytes] = []
    i = 0
    while len(tokens) < count:
        if i >= len(data):
            raise MalformedHeaderError("unexpected end of file inside header")
        c = data[i : i + 1]
        if c == b"#":
            while i < len(data) and data[i : i + 1] != b"\n":
                i += 1
        elif c.isspace():
            i += 1
        else:
            start = i
            while i < len(data) and not data[i : i + 1].isspace() and data[i : i + 1] != b"#":
                i += 1
            tokens.append(data[start:i])
    if i >= len(data) or not data[i : i + 1].isspace():
        raise MalformedHeaderError("missing whitespace after header")
    return tokens, i + 1


def read_image(path) -> ImageGrid:
    """Read a binary PGM file into an image grid.

    Pixel values map linearly onto [0, 255] reals (identity when the file
    maxval is 255).  Raises distinct errors for a malformed header, an
    unsupported maxval, and a truncated payload.
    """
    data = Path(path).read_bytes()
    tokens, offset = _header_tokens(data, 4)
    if tokens[0] != b"P5":
        raise MalformedHeaderError(f"not a binary PGM (magic {tokens[0]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise MalformedHeaderError(f"non-integer header field: {exc}") from exc
    if width < 2 or height < 2:
        raise MalformedHeaderError(f"image dimensions {width}x{height} too small")
    if width != height:
        raise MalformedHeaderError(f"only square images are supported, got {width}x{height}")
    if not 1 <= maxval <= 255:
        raise UnsupportedMaxvalError(f"maxval {maxval} unsupported (need 1..255)")
    payload = data[offset : offset + width * height]
    if len(payload) < width * height:
        raise TruncatedPayloadError(
            f"expected {width * height} pixel bytes, found {len(payload)}"
        )
    values = np.frombuffer(payload, dtype=np.uint8).astype(np.float64)
    if maxval != 255:
        values *= 255.0 / maxval
    return ImageGrid(values.reshape(height, width))


def write_image(image: ImageGrid, path) -> None:
    """Write an image as binary PGM (P5, maxval 255).

    Values are clamped to [0, 255] and rounded half-away-from-zero, so
    writing an already-quantized image round-trips bit-identically.
    """
    clamped = np.clip(image.values, 0.0, 255.0)
    pixels = np.floor(clamped + 0.5).astype(np.uint8)
    header = f"P5\n{image.side} {image.side}\n255\n".encode("ascii")
    Path(path).write_bytes(header + pixels.tobytes())
