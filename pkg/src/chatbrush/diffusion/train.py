"""Denoiser training: epsilon-prediction MSE with condition dropout.

The noised variable is the EDITED-image latent; the clean input-image latent
is channel-concatenated as conditioning, and the instruction embedding is
injected per block. Per-element dropout nulls the text condition, the image
condition, or both, so every guidance branch is trained.

Per-step randomness is derived from (seed, step), never from a running RNG,
so resuming from a checkpoint reproduces the uninterrupted run exactly.
"""
import json
import os
from dataclasses import dataclass

import numpy as np

from chatbrush import DataError, ModelError
from chatbrush.imaging import load_png
from chatbrush.nn import autograd as ag
from chatbrush.nn.optim import Adam, Ema
from chatbrush.nn.serialize import load_checkpoint, save_checkpoint

from .editor import EditorStack, save_stack
from .schedule import forward_diffuse

TRAIN_ARCH = "diffusion-train-state-v1"


@dataclass(frozen=True)
class DropoutConfig:
    p_text: float = 0.05
    p_img: float = 0.05
    p_both: float = 0.05

    def validate(self):
        total = self.p_text + self.p_img + self.p_both
        if min(self.p_text, self.p_img, self.p_both) < 0 or total > 1:
            raise DataError("dropout probabilities must be >= 0 and sum to <= 1")

    def to_json(self):
        return {"p_text": self.p_text, "p_img": self.p_img, "p_both": self.p_both}


def apply_condition_dropout(c_img, c_txt, null_txt, dropout, rng):
    """Disjoint per-element events: both, text-only, image-only."""
    b = c_img.shape[0]
    u = rng.random(b)
    both = u < dropout.p_both
    text_only = (~both) & (u < dropout.p_both + dropout.p_text)
    img_only = (~both) & (~text_only) & (u < dropout.p_both + dropout.p_text + dropout.p_img)
    c_img = c_img.copy()
    c_txt = c_txt.copy()
    c_img[both | img_only] = 0.0
    c_txt[both | text_only] = null_txt
    return c_img, c_txt


def training_step(stack, batch, dropout, rng, return_tensor=False):
    """One loss evaluation on a prepared batch dict.

    batch: {"input_latent": (B,L,H,W), "edited_latent": (B,L,H,W),
            "text_emb": (B,64)}. Returns the scalar loss tensor (graph
    attached) and the per-element timesteps used.
    """
    if not stack.embedder.trained:
        raise ModelError("embedder must be trained and frozen before diffusion training")
    dropout.validate()
    z0 = batch["edited_latent"]
    c_img = batch["input_latent"]
    c_txt = batch["text_emb"]
    b = z0.shape[0]
    t = rng.integers(1, stack.schedule.T + 1, size=b)
    eps = rng.standard_normal(z0.shape, dtype=np.float32)
    z_t = forward_diffuse(z0, t, eps, stack.schedule)
    c_img, c_txt = apply_condition_dropout(c_img, c_txt, stack.null_text_embedding,
                                           dropout, rng)
    pred = stack.unet(z_t, t, c_img, c_txt)
    loss = ag.tensor_mean(ag.power(ag.add(pred, ag.Tensor(-eps)), 2.0))
    return (loss, t) if return_tensor else (float(loss.data), t)


@dataclass
class TrainConfig:
    steps: int = 3000
    batch_size: int = 16
    lr: float = 2e-3
    lr_final: float = 2e-4
    seed: int = 0
    dropout: DropoutConfig = DropoutConfig()
    ema_decay: float = 0.999
    checkpoint_every: int = 500
    log_every: int = 100

    def to_json(self):
        d = self.__dict__.copy()
        d["dropout"] = self.dropout.to_json()
        return d


class PairDataset:
    """Edit pairs materialised as latents + instruction embeddings."""

    def __init__(self, pairs, images_root, stack, split_range=None):
        if not pairs:
            raise DataError("empty dataset")
        if split_range is not None:
            pairs = pairs[split_range[0]:split_range[1]]
        self.pairs = pairs
        orig = np.stack([load_png(os.path.join(images_root, p.original_image))
                         for p in pairs])
        edit = np.stack([load_png(os.path.join(images_root, p.edited_image))
                         for p in pairs])
        self.input_latent = stack.codec.encode(orig)
        self.edited_latent = stack.codec.encode(edit)
        self.text_emb = stack.embedder.embed_text([p.instruction for p in pairs])

    def __len__(self):
        return len(self.pairs)

    def batch(self, idx):
        return {"input_latent": self.input_latent[idx],
                "edited_latent": self.edited_latent[idx],
                "text_emb": self.text_emb[idx]}


def _step_rng(seed, step):
    return np.random.default_rng([seed, 7919, step])


def _batch_indices(n, batch_size, seed, step):
    epoch, pos = divmod(step * batch_size, max(n - n % batch_size, batch_size))
    order = np.random.default_rng([seed, 5077, epoch]).permutation(n)
    idx = order[pos:pos + batch_size]
    if len(idx) < batch_size:  # wrap within epoch remainder
        idx = np.concatenate([idx, order[:batch_size - len(idx)]])
    return idx


def train(stack, dataset, cfg, out_dir, resume_from=None, log=None):
    """Full training loop with checkpointing and loss-curve report."""
    if len(dataset) == 0:
        raise DataError("empty dataset")
    os.makedirs(out_dir, exist_ok=True)
    params = stack.unet.parameters()
    opt = Adam(params, lr=cfg.lr)
    ema = Ema(params, decay=cfg.ema_decay)
    start_step = 0
    losses = []
    if resume_from is not None:
        meta, arrays = load_checkpoint(resume_from, expect_arch=TRAIN_ARCH)
        stack.unet.load_state({k[5:]: v for k, v in arrays.items() if k.startswith("unet.")})
        ema.load({k[4:]: v for k, v in arrays.items() if k.startswith("ema.")})
        opt.load_state_dict({
            "t": meta["opt_t"],
            "m": {k[7:]: v for k, v in arrays.items() if k.startswith("adam_m.")},
            "v": {k[7:]: v for k, v in arrays.items() if k.startswith("adam_v.")},
        })
        start_step = int(meta["step"])
        losses = list(meta.get("losses", []))

    for step in range(start_step, cfg.steps):
        opt.lr = cfg.lr + (cfg.lr_final - cfg.lr) * step / max(cfg.steps - 1, 1)
        rng = _step_rng(cfg.seed, step)
        idx = _batch_indices(len(dataset), cfg.batch_size, cfg.seed, step)
        loss_t, _ = training_step(stack, dataset.batch(idx), cfg.dropout, rng,
                                  return_tensor=True)
        opt.zero_grad()
        loss_t.backward()
        opt.step()
        ema.update(params)
        losses.append(round(float(loss_t.data), 6))
        if log and (step + 1) % cfg.log_every == 0:
            recent = float(np.mean(losses[-cfg.log_every:]))
            log(f"step {step + 1}/{cfg.steps} loss {recent:.5f}")
        if (step + 1) % cfg.checkpoint_every == 0 or step + 1 == cfg.steps:
            _save_train_state(os.path.join(out_dir, "train_state.npz"), stack, opt,
                              ema, step + 1, losses)

    # final weights: EMA of parameters
    stack.unet.load_state(ema.arrays())
    stack.trained = True
    report = {
        "losses": losses,
        "config": cfg.to_json(),
        "schedule": stack.schedule.to_meta(),
        "dropout": cfg.dropout.to_json(),
        "n_pairs": len(dataset),
    }
    save_stack(os.path.join(out_dir, "diffusion.npz"), stack,
               extra_meta={"train_steps": cfg.steps})
    with open(os.path.join(out_dir, "train_report.json"), "w") as f:
        json.dump(report, f, sort_keys=True, indent=1)
    return report


def _save_train_state(path, stack, opt, ema, step, losses):
    arrays = {}
    for k, v in stack.unet.state_arrays().items():
        arrays[f"unet.{k}"] = v
    for k, v in ema.arrays().items():
        arrays[f"ema.{k}"] = v
    state = opt.state_dict()
    for k, v in state["m"].items():
        arrays[f"adam_m.{k}"] = v
    for k, v in state["v"].items():
        arrays[f"adam_v.{k}"] = v
    save_checkpoint(path, arrays, {"arch": TRAIN_ARCH, "step": step,
                                   "opt_t": state["t"], "losses": losses})
