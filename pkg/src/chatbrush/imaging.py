"""PNG boundary: float images in [0, 1] <-> 8-bit PNG bytes.

PNG is the canonical interchange format for datasets and the session
service; quantisation to uint8 happens exactly once, on encode.
"""
import io

import numpy as np
from PIL import Image, UnidentifiedImageError

from chatbrush import DataError


def to_uint8(img):
    return np.clip(np.rint(np.asarray(img) * 255.0), 0, 255).astype(np.uint8)


def from_uint8(arr):
    return (arr.astype(np.float32) / 255.0).astype(np.float32)


def to_png_bytes(img):
    buf = io.BytesIO()
    Image.fromarray(to_uint8(img), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def from_png_bytes(data):
    try:
        with Image.open(io.BytesIO(data)) as im:
            return from_uint8(np.asarray(im.convert("RGB")))
    except (UnidentifiedImageError, OSError, ValueError) as e:
        raise DataError(f"cannot decode image: {e}") from e


def decode_upload(data, resolution):
    """Decode an uploaded PNG/JPEG and resize to the model resolution."""
    try:
        with Image.open(io.BytesIO(data)) as im:
            im = im.convert("RGB")
            if im.size != (resolution, resolution):
                im = im.resize((resolution, resolution), Image.BILINEAR)
            return from_uint8(np.asarray(im))
    except (UnidentifiedImageError, OSError, ValueError) as e:
        raise DataError(f"cannot decode uploaded image: {e}") from e


def save_png(path, img):
    with open(path, "wb") as f:
        f.write(to_png_bytes(img))


def load_png(path):
    with open(path, "rb") as f:
        return from_png_bytes(f.read())
