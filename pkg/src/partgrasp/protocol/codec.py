"""Base64 PNG payload encoding shared by clients, servers and fixtures.

PNG is lossless; depth quantization to whole millimeters is the only
permitted delta on a round trip (bounded by 0.5 mm).
"""

from __future__ import annotations

import base64
import io

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import InvalidInputError
from ..geometry import BinaryMask, DepthImage, ImageRGB
from ..imageio import depth_to_millimeters


def _png_bytes(img: Image.Image) -> bytes:
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def _decode_png(b64: str) -> np.ndarray:
    try:
        raw = base64.b64decode(b64, validate=True)
        with Image.open(io.BytesIO(raw)) as im:
            im.load()
            return np.asarray(im)
    except (ValueError, OSError, UnidentifiedImageError) as exc:
        raise InvalidInputError(f"bad PNG payload: {exc}") from exc


def encode_rgb(image: ImageRGB) -> str:
    return base64.b64encode(_png_bytes(Image.fromarray(image.pixels, "RGB"))).decode()


def decode_rgb(b64: str) -> ImageRGB:
    arr = _decode_png(b64)
    if arr.ndim == 2:
        arr = np.stack([arr] * 3, axis=2)
    return ImageRGB(arr[:, :, :3].astype(np.uint8))


def encode_depth(depth: DepthImage) -> str:
    return base64.b64encode(
        _png_bytes(Image.fromarray(depth_to_millimeters(depth)))).decode()


def decode_depth(b64: str) -> DepthImage:
    arr = _decode_png(b64)
    if arr.ndim != 2:
        raise InvalidInputError("depth PNG must be single channel")
    return DepthImage(arr.astype(np.float64) / 1000.0)


def encode_mask(mask: BinaryMask) -> str:
    u8 = np.where(mask.bits, 255, 0).astype(np.uint8)
    return base64.b64encode(_png_bytes(Image.fromarray(u8, "L"))).decode()


def decode_mask(b64: str) -> BinaryMask:
    arr = _decode_png(b64)
    if arr.ndim == 3:
        arr = arr[:, :, 0]
    return BinaryMask(arr != 0)
