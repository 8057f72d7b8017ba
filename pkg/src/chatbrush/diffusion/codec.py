"""Latent codecs: exact identity (default) or a tiny trainable autoencoder.

Identity keeps diffusion in pixel space at desk scale. The autoencoder mode
compresses 4x spatially (64x64x3 -> 16x16x8) and must reconstruct held-out
renders below 0.01 MSE before it is considered usable.
"""
import numpy as np

from chatbrush import DataError, ModelError
from chatbrush.nn import autograd as ag
from chatbrush.nn.layers import Conv2d, Module
from chatbrush.nn.optim import Adam
from chatbrush.nn.serialize import load_checkpoint, save_checkpoint

IDENTITY = "identity"
TINY_AE = "tiny_autoencoder"
AE_ARCH = "codec-tiny-ae-v1"
LATENT_CHANNELS = {IDENTITY: 3, TINY_AE: 8}


class TinyAutoencoder(Module):
    def __init__(self, rng, dtype=np.float32):
        self.e1 = Conv2d(3, 32, 3, rng, stride=2, dtype=dtype)
        self.e2 = Conv2d(32, 8, 3, rng, stride=2, dtype=dtype)
        self.d1 = Conv2d(8, 32, 3, rng, dtype=dtype)
        self.d2 = Conv2d(32, 32, 3, rng, dtype=dtype)
        self.out = Conv2d(32, 3, 3, rng, dtype=dtype)

    def encode_t(self, x):
        return self.e2(ag.silu(self.e1(x)))

    def decode_t(self, z):
        h = ag.silu(self.d1(ag.upsample_nearest2x(z)))
        h = ag.silu(self.d2(ag.upsample_nearest2x(h)))
        return self.out(h)


class LatentCodec:
    """encode(image NHWC in [0,1]) -> latent NCHW; decode inverts."""

    def __init__(self, mode=IDENTITY, model=None):
        if mode not in (IDENTITY, TINY_AE):
            raise DataError(f"unknown codec mode {mode!r}")
        self.mode = mode
        self.model = model
        if mode == TINY_AE and model is None:
            raise ModelError("tiny_autoencoder codec needs trained parameters")

    @property
    def latent_channels(self):
        return LATENT_CHANNELS[self.mode]

    def latent_shape(self, resolution):
        if self.mode == IDENTITY:
            return (3, resolution, resolution)
        return (8, resolution // 4, resolution // 4)

    def encode(self, images):
        arr = np.asarray(images, dtype=np.float32)
        if arr.ndim == 3:
            arr = arr[None]
        x = np.ascontiguousarray(arr.transpose(0, 3, 1, 2))
        if self.mode == IDENTITY:
            return x
        with ag.no_grad():
            return self.model.encode_t(ag.Tensor(x)).data.copy()

    def decode(self, latents):
        z = np.asarray(latents, dtype=np.float32)
        if self.mode == IDENTITY:
            imgs = z.transpose(0, 2, 3, 1)
        else:
            with ag.no_grad():
                imgs = self.model.decode_t(ag.Tensor(z)).data.transpose(0, 2, 3, 1)
        return np.clip(imgs, 0.0, 1.0).astype(np.float32)

    def to_meta(self):
        return {"mode": self.mode}


def train_autoencoder(images, config=None, log=None):
    """Fit the tiny AE on renders; returns (codec, report)."""
    cfg = {"steps": 300, "batch_size": 16, "lr": 2e-3, "seed": 0}
    cfg.update(config or {})
    if len(images) < cfg["batch_size"]:
        raise DataError("not enough images to train the autoencoder")
    rng = np.random.default_rng(cfg["seed"])
    model = TinyAutoencoder(np.random.default_rng(cfg["seed"] + 1))
    opt = Adam(model.parameters(), lr=cfg["lr"])
    data = np.ascontiguousarray(np.stack(images).transpose(0, 3, 1, 2).astype(np.float32))
    losses = []
    for step in range(cfg["steps"]):
        idx = rng.integers(len(images), size=cfg["batch_size"])
        x = ag.Tensor(data[idx])
        recon = model.decode_t(model.encode_t(x))
        loss = ag.tensor_mean(ag.power(ag.add(recon, ag.mul(x, -1.0)), 2.0))
        opt.zero_grad()
        loss.backward()
        opt.step()
        losses.append(float(loss.data))
        if log and (step + 1) % 100 == 0:
            log(f"ae step {step + 1}/{cfg['steps']} loss {losses[-1]:.5f}")
    codec = LatentCodec(TINY_AE, model=model)
    return codec, {"loss_history": losses[-20:], "config": cfg}


def reconstruction_mse(codec, images):
    recon = codec.decode(codec.encode(images))
    return float(np.mean((np.asarray(images, dtype=np.float32) - recon) ** 2))


def save_codec(path, codec, report=None):
    meta = {"arch": AE_ARCH, "mode": codec.mode, "report": report or {}}
    arrays = codec.model.state_arrays() if codec.model is not None else {}
    save_checkpoint(path, arrays, meta)


def load_codec(path):
    meta, arrays = load_checkpoint(path, expect_arch=AE_ARCH)
    if meta["mode"] == IDENTITY:
        return LatentCodec(IDENTITY)
    model = TinyAutoencoder(np.random.default_rng(0))
    model.load_state(arrays)
    return LatentCodec(TINY_AE, model=model)
