#!/usr/bin/env python3
"""Pilot run: small corpus, short training, regression-criterion readout."""
import os
import sys
import time

import numpy as np

sys.path.insert(0, "src")

from chatbrush.diffusion import (DropoutConfig, GuidanceConfig, PairDataset,
                                 TrainConfig, ddim_sample_batch, new_stack, train)
from chatbrush.embed import train_contrastive
from chatbrush.evals import edit_quality_report
from chatbrush.imaging import load_png
from chatbrush.synth import build_datasets, load_manifest, load_pairs

OUT = "/tmp/pilot"


def main():
    t0 = time.time()
    data_dir = os.path.join(OUT, "data")
    if not os.path.exists(os.path.join(data_dir, "manifest.json")):
        build_datasets(n_dialogues=10, n_pairs=900, seed=11, out_dir=data_dir,
                       pair_kinds=("recolor", "replace_shape"))
    pairs = load_pairs(data_dir)
    manifest = load_manifest(data_dir)
    print(f"[{time.time()-t0:6.0f}s] dataset ready: {len(pairs)} pairs")

    samples = []
    lo, hi = manifest["splits"]["pairs"]["train"]
    for p in pairs[lo:hi]:
        samples.append((load_png(os.path.join(data_dir, p.original_image)), p.caption))
        edited = load_png(os.path.join(data_dir, p.edited_image))
        samples.append((edited, p.edited_caption))
        samples.append((edited, p.instruction))
    embedder, erep = train_contrastive(samples, {"epochs": 24, "batch_size": 128, "lr": 1e-3, "seed": 0},
                                       log=print)
    print(f"[{time.time()-t0:6.0f}s] embedder loss history {erep['loss_history']}")

    stack = new_stack(embedder, base=16, seed=0)
    dataset = PairDataset(pairs, data_dir, stack, split_range=manifest["splits"]["pairs"]["train"])
    cfg = TrainConfig(steps=int(sys.argv[1]) if len(sys.argv) > 1 else 600,
                      batch_size=16, lr=2e-3, lr_final=4e-4, seed=0,
                      dropout=DropoutConfig(), ema_decay=0.995,
                      checkpoint_every=10_000, log_every=50)
    train(stack, dataset, cfg, os.path.join(OUT, "ckpt"), log=print)
    print(f"[{time.time()-t0:6.0f}s] trained")

    lo, hi = manifest["splits"]["pairs"]["test"]
    test_pairs = pairs[lo:hi][:40]
    inputs = np.stack([load_png(os.path.join(data_dir, p.original_image)) for p in test_pairs])
    truths = np.stack([load_png(os.path.join(data_dir, p.edited_image)) for p in test_pairs])
    for s_img, s_text in [(1.0, 1.0), (1.5, 3.0), (1.5, 7.5)]:
        gcfg = GuidanceConfig(s_img=s_img, s_text=s_text, steps=20, seed=5)
        gen = []
        for b in range(0, len(test_pairs), 20):
            gen.append(ddim_sample_batch(stack, inputs[b:b+20],
                                         [p.instruction for p in test_pairs[b:b+20]], gcfg))
        gen = np.concatenate(gen)
        rep = edit_quality_report(test_pairs, inputs, truths, gen, embedder)
        print(f"[{time.time()-t0:6.0f}s] s_I={s_img} s_T={s_text} "
              f"closer={rep['fraction_closer_to_truth']:.2f} "
              f"mse_truth={rep['mean_mse_to_truth']:.4f} mse_input={rep['mean_mse_to_input']:.4f} "
              f"dirsim={rep['mean_directional_similarity']:.3f} fid={rep['fid_truth_vs_generated']:.2f}")


if __name__ == "__main__":
    main()
