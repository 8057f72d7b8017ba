#!/usr/bin/env python3
import os, sys
import numpy as np
sys.path.insert(0, "src")
from chatbrush.diffusion import GuidanceConfig, ddim_sample_batch, load_stack
from chatbrush.embed import train_contrastive
from chatbrush.evals import edit_quality_report
from chatbrush.imaging import load_png
from chatbrush.synth import load_manifest, load_pairs

OUT = "/tmp/pilot"
data_dir = os.path.join(OUT, "data")
pairs = load_pairs(data_dir)
manifest = load_manifest(data_dir)
samples = []
lo, hi = manifest["splits"]["pairs"]["train"]
for p in pairs[lo:hi]:
    samples.append((load_png(os.path.join(data_dir, p.original_image)), p.caption))
    samples.append((load_png(os.path.join(data_dir, p.edited_image)), p.edited_caption))
embedder, _ = train_contrastive(samples, {"epochs": 24, "batch_size": 128, "lr": 1e-3, "seed": 0})
stack, meta = load_stack(os.path.join(OUT, "ckpt", "diffusion.npz"), embedder)
print("stack loaded; trained:", stack.trained, flush=True)

lo, hi = manifest["splits"]["pairs"]["test"]
test_pairs = pairs[lo:hi][:40]
inputs = np.stack([load_png(os.path.join(data_dir, p.original_image)) for p in test_pairs])
truths = np.stack([load_png(os.path.join(data_dir, p.edited_image)) for p in test_pairs])
for s_img, s_text in [(1.5, 7.5), (1.5, 3.0), (1.0, 5.0), (2.5, 7.5)]:
    gcfg = GuidanceConfig(s_img=s_img, s_text=s_text, steps=20, seed=5)
    gen = []
    for b in range(0, len(test_pairs), 20):
        gen.append(ddim_sample_batch(stack, inputs[b:b+20], [p.instruction for p in test_pairs[b:b+20]], gcfg))
    gen = np.concatenate(gen)
    rep = edit_quality_report(test_pairs, inputs, truths, gen, embedder)
    print(f"s_I={s_img} s_T={s_text} closer={rep['fraction_closer_to_truth']:.2f} "
          f"mse_t={rep['mean_mse_to_truth']:.4f} mse_i={rep['mean_mse_to_input']:.4f} "
          f"dirsim={rep['mean_directional_similarity']:.3f}", flush=True)
