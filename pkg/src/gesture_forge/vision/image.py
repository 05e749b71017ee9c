"""Binary PPM (P6) and 24-bit uncompressed BMP codecs plus grayscale conversion.

Both formats round-trip bit-exactly. BMP rows are stored bottom-up on disk
and normalized to top-down in memory; PPM is already top-down.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ..errors import (
    TruncatedImageError,
    UnknownImageFormatError,
    UnsupportedImageError,
)

# Rec. 601 luma constants, rounded half-up to an 8-bit intensity.
GRAY_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass
class ImageBuffer:
    """Row-major 8-bit RGB pixels, top-down."""

    width: int
    height: int
    pixels: np.ndarray  # (height, width, 3) uint8

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise UnsupportedImageError(f"degenerate image {self.width}x{self.height}")
        if self.pixels.shape != (self.height, self.width, 3):
            raise UnsupportedImageError(
                f"pixel block {self.pixels.shape} != ({self.height}, {self.width}, 3)"
            )
        if self.pixels.dtype != np.uint8:
            raise UnsupportedImageError(f"pixels must be uint8, got {self.pixels.dtype}")


def decode_image(data: bytes) -> ImageBuffer:
    """Decode PPM or BMP bytes, dispatching on the magic number."""
    if data[:2] == b"P6":
        return decode_ppm(data)
    if data[:2] == b"BM":
        return decode_bmp(data)
    raise UnknownImageFormatError(f"unrecognized magic bytes {data[:2]!r}")


# --- PPM ----------------------------------------------------------------------

def _ppm_header_tokens(data: bytes, count: int) -> tuple[list[int], int]:
    """Read ``count`` whitespace-separated integers, skipping # comments."""
    tokens: list[int] = []
    i = 2  # past the magic
    while len(tokens) < count:
        if i >= len(data):
            raise TruncatedImageError("PPM header ended early")
        ch = data[i : i + 1]
        if ch.isspace():
            i += 1
        elif ch == b"#":
            while i < len(data) and data[i : i + 1] not in (b"\n", b"\r"):
                i += 1
        elif ch.isdigit():
            j = i
            while j < len(data) and data[j : j + 1].isdigit():
                j += 1
            tokens.append(int(data[i:j]))
            i = j
        else:
            raise UnsupportedImageError(f"unexpected byte {ch!r} in PPM header")
    # Exactly one whitespace byte separates the header from the payload.
    if i >= len(data) or not data[i : i + 1].isspace():
        raise TruncatedImageError("PPM payload missing")
    return tokens, i + 1


def decode_ppm(data: bytes) -> ImageBuffer:
    if data[:2] != b"P6":
        raise UnknownImageFormatError(f"not a binary PPM: magic {data[:2]!r}")
    (width, height, maxval), offset = _ppm_header_tokens(data, 3)
    if maxval != 255:
        raise UnsupportedImageError(f"only maxval 255 is supported, got {maxval}")
    need = width * height * 3
    payload = data[offset : offset + need]
    if len(payload) < need:
        raise TruncatedImageError(
            f"PPM payload has {len(payload)} bytes, expected {need}"
        )
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3)
    return ImageBuffer(width, height, pixels.copy())


def encode_ppm(img: ImageBuffer) -> bytes:
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


# --- BMP ----------------------------------------------------------------------

def decode_bmp(data: bytes) -> ImageBuffer:
    if data[:2] != b"BM":
        raise UnknownImageFormatError(f"not a BMP: magic {data[:2]!r}")
    if len(data) < 54:
        raise TruncatedImageError("BMP header truncated")
    pixel_offset = struct.unpack_from("<I", data, 10)[0]
    header_size = struct.unpack_from("<I", data, 14)[0]
    if header_size < 40:
        raise UnsupportedImageError(f"BMP info header size {header_size} unsupported")
    width, height = struct.unpack_from("<ii", data, 18)
    bitcount = struct.unpack_from("<H", data, 28)[0]
    compression = struct.unpack_from("<I", data, 30)[0]
    if bitcount != 24:
        raise UnsupportedImageError(f"only 24-bit BMP supported, got {bitcount}")
    if compression != 0:
        raise UnsupportedImageError(f"compressed BMP (method {compression}) unsupported")
    bottom_up = height > 0
    height = abs(height)
    if width <= 0 or height == 0:
        raise UnsupportedImageError(f"degenerate BMP {width}x{height}")

    row_stride = (width * 3 + 3) // 4 * 4
    need = row_stride * height
    raw = data[pixel_offset : pixel_offset + need]
    if len(raw) < need:
        raise TruncatedImageError(f"BMP payload has {len(raw)} bytes, expected {need}")
    rows = np.frombuffer(raw, dtype=np.uint8).reshape(height, row_stride)
    bgr = rows[:, : width * 3].reshape(height, width, 3)
    if bottom_up:
        bgr = bgr[::-1]
    rgb = bgr[:, :, ::-1]
    return ImageBuffer(width, height, np.ascontiguousarray(rgb))


def encode_bmp(img: ImageBuffer) -> bytes:
    row_stride = (img.width * 3 + 3) // 4 * 4
    payload_size = row_stride * img.height
    file_size = 54 + payload_size
    header = struct.pack(
        "<2sIHHI" "IiiHHIIiiII",
        b"BM", file_size, 0, 0, 54,
        40, img.width, img.height, 1, 24, 0, payload_size, 2835, 2835, 0, 0,
    )
    rows = np.zeros((img.height, row_stride), dtype=np.uint8)
    bgr = img.pixels[::-1, :, ::-1]  # bottom-up, channel-swapped
    rows[:, : img.width * 3] = bgr.reshape(img.height, img.width * 3)
    return header + rows.tobytes()


# --- grayscale ------------------------------------------------------------------

def to_grayscale(img: ImageBuffer) -> np.ndarray:
    """Per-pixel round(0.299 R + 0.587 G + 0.114 B), half rounded up."""
    r, g, b = GRAY_WEIGHTS
    mix = (
        img.pixels[:, :, 0] * r + img.pixels[:, :, 1] * g + img.pixels[:, :, 2] * b
    )
    return np.floor(mix + 0.5).astype(np.uint8)
