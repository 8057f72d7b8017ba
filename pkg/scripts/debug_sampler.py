#!/usr/bin/env python3
import os, sys
import numpy as np
sys.path.insert(0, "src")
from chatbrush.diffusion import GuidanceConfig, ddim_sample_batch, load_stack, forward_diffuse
from chatbrush.diffusion.sampler import ddim_timesteps
from chatbrush.diffusion.guidance import guided_noise
from chatbrush.embed import train_contrastive, save_embed_checkpoint, load_embed_checkpoint
from chatbrush.imaging import load_png
from chatbrush.synth import load_manifest, load_pairs

OUT = "/tmp/pilot"; data_dir = os.path.join(OUT, "data")
pairs = load_pairs(data_dir); manifest = load_manifest(data_dir)
ck = os.path.join(OUT, "ckpt", "embed.npz")
if os.path.exists(ck):
    embedder, _ = load_embed_checkpoint(ck)
else:
    samples = []
    lo, hi = manifest["splits"]["pairs"]["train"]
    for p in pairs[lo:hi]:
        samples.append((load_png(os.path.join(data_dir, p.original_image)), p.caption))
        samples.append((load_png(os.path.join(data_dir, p.edited_image)), p.edited_caption))
    embedder, _ = train_contrastive(samples, {"epochs": 24, "batch_size": 128, "lr": 1e-3, "seed": 0})
    save_embed_checkpoint(ck, embedder)
stack, meta = load_stack(os.path.join(OUT, "ckpt", "diffusion.npz"), embedder)
print("faithful embedder + stack loaded", flush=True)

lo, hi = manifest["splits"]["pairs"]["test"]
tp = pairs[lo:hi][:16]
inputs = np.stack([load_png(os.path.join(data_dir, p.original_image)) for p in tp])
truths = np.stack([load_png(os.path.join(data_dir, p.edited_image)) for p in tp])
ci = stack.codec.encode(inputs); z0 = stack.codec.encode(truths)
ct = stack.embedder.embed_text([p.instruction for p in tp])

rng = np.random.default_rng(0)
print("x0-from-real-z_t probes (conditional branch):")
for t in (950, 800, 600, 400, 200, 100):
    eps = rng.standard_normal(z0.shape).astype(np.float32)
    zt = forward_diffuse(z0, np.full(len(tp), t), eps, stack.schedule)
    ehat = stack.unet.predict(zt, np.full(len(tp), t), ci, ct)
    ab = stack.schedule.alpha_bar(t)
    x0 = np.clip((zt - np.sqrt(1-ab)*ehat)/np.sqrt(ab), 0, 1)
    print(f"  t={t:4d} x0_mse={((x0-z0)**2).mean():.4f}", flush=True)

print("instrumented trajectory (s=1,1, 20 steps), image 0:")
g = GuidanceConfig(s_img=1.0, s_text=1.0, steps=20, seed=5)
taus = ddim_timesteps(stack.schedule.T, g.steps)
z = np.random.default_rng(g.seed).standard_normal((len(tp), 3, 64, 64)).astype(np.float32)
for i, t in enumerate(taus):
    t_prev = taus[i+1] if i+1 < len(taus) else 0
    ab_t = stack.schedule.alpha_bar(int(t)); ab_p = stack.schedule.alpha_bar(int(t_prev))
    eps = guided_noise(stack.unet, z, np.full(len(tp), t), ci, ct, 1.0, 1.0, stack.null_text_embedding).astype(np.float64)
    z64 = z.astype(np.float64)
    x0 = np.clip((z64 - np.sqrt(1-ab_t)*eps)/np.sqrt(ab_t), 0, 1)
    if i % 4 == 0 or t_prev == 0:
        print(f"  t={t:4d} x0_mse_vs_truth={((x0-z0)**2).mean():.4f} x0_std={x0.std():.3f}", flush=True)
    z = (np.sqrt(ab_p)*x0 + np.sqrt(max(0.0, 1-ab_p))*eps).astype(np.float32)
mt = ((z.transpose(0,2,3,1).clip(0,1)-truths)**2).mean(); 
print("final mse vs truth:", mt, flush=True)
for steps in (20, 50):
    g = GuidanceConfig(s_img=1.0, s_text=1.0, steps=steps, seed=5)
    gen = ddim_sample_batch(stack, inputs, [p.instruction for p in tp], g)
    m_t = ((gen-truths)**2).mean(axis=(1,2,3)); m_i = ((gen-inputs)**2).mean(axis=(1,2,3))
    print(f"steps={steps} (1,1): closer={float((m_t<m_i).mean()):.2f} mse_t={m_t.mean():.4f} gen_std={gen.std():.3f}", flush=True)
