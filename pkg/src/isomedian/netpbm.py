"""Binary PGM (P5), PPM (P6), and PFM image files.

PGM/PPM carry uint8 (maxval 255) or big-endian uint16 (maxval 65535)
samples.  PFM carries float32 rows bottom-to-top; the sign of the scale
line encodes endianness (negative = little-endian) per the PFM convention.
"""

from __future__ import annotations

import numpy as np


def _read_token(f) -> bytes:
    """Next whitespace-delimited header token, skipping # comments."""
    tok = b""
    while True:
        ch = f.read(1)
        if ch == b"":
            raise ValueError("truncated image header")
        if ch == b"#":
            while ch not in (b"\n", b"", b"\r"):
                ch = f.read(1)
            continue
        if ch.isspace():
            if tok:
                return tok
            continue
        tok += ch


def read_image(path) -> np.ndarray:
    """Read a PGM/PPM/PFM file into (H, W) or (H, W, 3) array."""
    with open(path, "rb") as f:
        magic = f.read(2)
        if magic in (b"P5", b"P6"):
            width = int(_read_token(f))
            height = int(_read_token(f))
            maxval = int(_read_token(f))
            if maxval not in (255, 65535):
                raise ValueError(f"unsupported maxval {maxval} (want 255 or 65535)")
            channels = 3 if magic == b"P6" else 1
            dtype = np.dtype(">u2") if maxval == 65535 else np.dtype("u1")
            count = width * height * channels
            data = np.frombuffer(f.read(count * dtype.itemsize), dtype=dtype,
                                 count=count)
            img = data.reshape(height, width, channels)
            img = img.astype(np.uint16) if maxval == 65535 else img
            return img[:, :, 0] if channels == 1 else img
        if magic in (b"Pf", b"PF"):
            width = int(_read_token(f))
            height = int(_read_token(f))
            scale = float(_read_token(f))
            channels = 3 if magic == b"PF" else 1
            dtype = np.dtype("<f4") if scale < 0 else np.dtype(">f4")
            count = width * height * channels
            data = np.frombuffer(f.read(count * 4), dtype=dtype, count=count)
            img = data.reshape(height, width, channels).astype(np.float32)
            img = np.flipud(img)  # PFM rows run bottom to top
            return np.ascontiguousarray(img[:, :, 0] if channels == 1 else img)
        raise ValueError(f"unsupported image magic {magic!r} "
                         "(want P5, P6, Pf, or PF)")


def write_image(path, image: np.ndarray) -> None:
    """Write PGM for integer grayscale, PPM for integer color, PFM for float."""
    image = np.asarray(image)
    if image.ndim == 3 and image.shape[2] == 1:
        image = image[:, :, 0]
    if image.ndim not in (2, 3) or (image.ndim == 3 and image.shape[2] != 3):
        raise ValueError("image must be (H, W) or (H, W, 3)")
    h, w = image.shape[:2]
    color = image.ndim == 3
    with open(path, "wb") as f:
        if image.dtype == np.float32:
            f.write(b"PF\n" if color else b"Pf\n")
            f.write(f"{w} {h}\n".encode())
            f.write(b"-1.0\n")
            f.write(np.flipud(image).astype("<f4").tobytes())
        elif image.dtype == np.uint8:
            f.write((b"P6\n" if color else b"P5\n") + f"{w} {h}\n255\n".encode())
            f.write(image.tobytes())
        elif image.dtype == np.uint16:
            f.write((b"P6\n" if color else b"P5\n") + f"{w} {h}\n65535\n".encode())
            f.write(image.astype(">u2").tobytes())
        else:
            raise ValueError(f"unsupported image dtype {image.dtype}")
