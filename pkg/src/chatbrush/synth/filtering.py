"""Directional-similarity pair filter.

Keeps pairs whose image-space edit direction agrees with the text-space
caption direction under the trained embedder. Pairs with a (near-)zero image
direction are always dropped: the cosine is undefined and an edit that
changed nothing teaches nothing. Their recorded score is -1.0, the floor of
the similarity range.
"""
import os

import numpy as np

from chatbrush.embed import ZeroDirectionError, directional_similarity
from chatbrush.imaging import load_png


def score_pair(model, pair, images_root):
    orig = load_png(os.path.join(images_root, pair.original_image))
    edit = load_png(os.path.join(images_root, pair.edited_image))
    return directional_similarity(model, orig, edit, pair.caption, pair.edited_caption)


def filter_pairs(pairs, model, threshold, images_root):
    """Score every pair; returns (kept, dropped)."""
    kept, dropped = [], []
    for pair in pairs:
        try:
            pair.filter_score = score_pair(model, pair, images_root)
        except ZeroDirectionError:
            pair.filter_score = -1.0
            dropped.append(pair)
            continue
        (kept if pair.filter_score >= threshold else dropped).append(pair)
    return kept, dropped


def tau_for_precision(positive_scores, negative_scores, precision=0.95):
    """Smallest threshold giving at least `precision` among kept pairs.

    Calibrated on a labelled validation set of correct vs mismatched pairs;
    the result is stored in config rather than hard-coded.
    """
    pos = np.sort(np.asarray(positive_scores))
    neg = np.asarray(negative_scores)
    candidates = np.unique(np.concatenate([pos, neg, [-1.0]]))
    for tau in candidates:
        tp = float((pos >= tau).sum())
        fp = float((neg >= tau).sum())
        if tp == 0:
            continue
        if tp / (tp + fp) >= precision:
            return float(tau)
    return float(pos[-1]) if len(pos) else 1.0
