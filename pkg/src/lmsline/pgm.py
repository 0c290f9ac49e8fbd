"""Binary PGM (P5) image I/O.

Only 8-bit images are handled (maxval up to 255, one byte per pixel), which
is all the detector consumes.  The writer emits the canonical minimal
header, so write -> read -> write reproduces a file byte for byte.
"""

from __future__ import annotations

import numpy as np

from .geometry import InvalidInputError


class PgmParseError(ValueError):
    """Malformed PGM data; the message carries the byte offset of the fault."""


def write_pgm(path, image: np.ndarray) -> None:
    """Write ``image`` (2-D uint8) as a binary P5 file with maxval 255."""
    img = np.asarray(image)
    if img.ndim != 2:
        raise InvalidInputError(f"expected a 2-D image, got shape {img.shape}")
    if img.dtype != np.uint8:
        raise InvalidInputError(f"expected uint8 pixels, got {img.dtype}")
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def _read_header_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Next whitespace-delimited header token, skipping ``#`` comments."""
    n = len(data)
    while pos < n:
        ch = data[pos : pos + 1]
        if ch in b" \t\r\n":
            pos += 1
        elif ch == b"#":
            while pos < n and data[pos : pos + 1] != b"\n":
                pos += 1
        else:
            break
    if pos >= n:
        raise PgmParseError(f"unexpected end of header at byte {pos}")
    start = pos
    while pos < n and data[pos : pos + 1] not in b" \t\r\n":
        pos += 1
    return data[start:pos], pos


def read_pgm(path) -> np.ndarray:
    """Read a binary P5 file into a uint8 array of shape ``(height, width)``.

    Raises :class:`PgmParseError` for anything other than a well-formed
    8-bit P5 image: wrong magic, non-numeric dimensions, maxval outside
    [1, 255], or truncated pixel data.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    magic, pos = _read_header_token(data, 0)
    if magic != b"P5":
        raise PgmParseError(f"unsupported magic {magic!r} at byte 0; only binary P5 is handled")
    fields = []
    for name in ("width", "height", "maxval"):
        at = pos
        token, pos = _read_header_token(data, pos)
        if not token.isdigit():
            raise PgmParseError(f"bad {name} token {token!r} at byte {at}")
        fields.append(int(token))
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise PgmParseError(f"bad dimensions {width}x{height}")
    if not 1 <= maxval <= 255:
        raise PgmParseError(f"unsupported maxval {maxval}; only single-byte images are handled")
    # Exactly one whitespace byte separates the header from the raster.
    if pos >= len(data) or data[pos : pos + 1] not in b" \t\r\n":
        raise PgmParseError(f"missing raster separator at byte {pos}")
    pos += 1
    need = width * height
    raster = data[pos : pos + need]
    if len(raster) < need:
        raise PgmParseError(
            f"truncated raster: expected {need} bytes at byte {pos}, found {len(raster)}"
        )
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()
