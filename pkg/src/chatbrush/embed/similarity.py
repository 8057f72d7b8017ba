"""Directional similarity between image-space and text-space edit directions."""
import numpy as np

from chatbrush import ChatbrushError

MIN_DIRECTION_NORM = 1e-8


class ZeroDirectionError(ChatbrushError):
    """An edit direction has (near-)zero norm; cosine is undefined."""


def direction(a, b):
    d = np.asarray(b, dtype=np.float64) - np.asarray(a, dtype=np.float64)
    n = np.linalg.norm(d)
    if n < MIN_DIRECTION_NORM:
        raise ZeroDirectionError(f"edit direction norm {n:.2e} below {MIN_DIRECTION_NORM}")
    return d / n


def directional_similarity(model, image_a, image_b, caption_a, caption_b):
    """cos( e_img(I') - e_img(I), e_txt(c') - e_txt(c) ), in [-1, 1]."""
    img_dir = direction(model.embed_image(image_a)[0], model.embed_image(image_b)[0])
    txt_dir = direction(model.embed_text(caption_a), model.embed_text(caption_b))
    return float(np.clip(np.dot(img_dir, txt_dir), -1.0, 1.0))
