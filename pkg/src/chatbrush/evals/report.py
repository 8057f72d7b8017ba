"""Edit-quality regression report over held-out pairs."""
import json
import os

import numpy as np

from chatbrush.embed import ZeroDirectionError, directional_similarity
from chatbrush.imaging import load_png

from .fid import fid
from .prd import prd


def generate_edits(stack, pairs, images_root, gcfg, batch_size=25):
    """Sample edited images for every pair; returns (inputs, truths, generated)."""
    from chatbrush.diffusion import ddim_sample_batch
    inputs = np.stack([load_png(os.path.join(images_root, p.original_image)) for p in pairs])
    truths = np.stack([load_png(os.path.join(images_root, p.edited_image)) for p in pairs])
    out = []
    for lo in range(0, len(pairs), batch_size):
        hi = min(lo + batch_size, len(pairs))
        out.append(ddim_sample_batch(stack, inputs[lo:hi],
                                     [p.instruction for p in pairs[lo:hi]], gcfg))
    return inputs, truths, np.concatenate(out, axis=0)


def edit_quality_report(pairs, inputs, truths, generated, embedder,
                        feature_fn=None):
    """Metrics over aligned arrays of inputs / ground truths / generations.

    feature_fn defaults to the embedder's pre-normalization pooled features.
    """
    feature_fn = feature_fn or embedder.image_features
    per_kind = {}
    mse_to_truth = ((generated - truths) ** 2).mean(axis=(1, 2, 3))
    mse_to_input = ((generated - inputs) ** 2).mean(axis=(1, 2, 3))
    sims = []
    for i, pair in enumerate(pairs):
        kind = pair.edit.kind
        slot = per_kind.setdefault(kind, {"n": 0, "mse_to_truth": 0.0,
                                          "mse_to_input": 0.0})
        slot["n"] += 1
        slot["mse_to_truth"] += float(mse_to_truth[i])
        slot["mse_to_input"] += float(mse_to_input[i])
        try:
            sims.append(directional_similarity(embedder, inputs[i], generated[i],
                                               pair.caption, pair.edited_caption))
        except ZeroDirectionError:
            sims.append(0.0)
    for slot in per_kind.values():
        slot["mse_to_truth"] /= slot["n"]
        slot["mse_to_input"] /= slot["n"]

    feats_truth = feature_fn(truths)
    feats_gen = feature_fn(generated)
    # distribution metrics need enough samples (FID: n >= d+1; PRD: n >= k)
    fid_value = fid(feats_truth, feats_gen) if len(pairs) > feats_truth.shape[1] else None
    if len(pairs) >= 20:
        prd_res = prd(feats_truth, feats_gen)
        prd_summary = {"max_f1": prd_res["max_f1"], "f_8": prd_res["f_8"],
                       "f_1_8": prd_res["f_1_8"]}
    else:
        prd_summary = None
    closer = float((mse_to_truth < mse_to_input).mean())
    return {
        "n_pairs": len(pairs),
        "per_kind": per_kind,
        "mean_mse_to_truth": float(mse_to_truth.mean()),
        "mean_mse_to_input": float(mse_to_input.mean()),
        "fraction_closer_to_truth": closer,
        "mean_directional_similarity": float(np.mean(sims)),
        "fid_truth_vs_generated": fid_value,
        "prd": prd_summary,
    }


def write_report(path, report):
    with open(path, "w") as f:
        json.dump(report, f, sort_keys=True, indent=1)
        f.write("\n")
