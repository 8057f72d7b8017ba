"""Conditional U-Net noise predictor.

Input: noised edited-image latent channel-concatenated with the clean input
latent; the input latent is also re-concatenated (average-pooled) at every
scale so edits can stay anchored to the source image. Conditioning vector:
sinusoidal timestep embedding plus the instruction embedding, applied per
block as a FiLM scale-and-shift. Output has the latent shape (epsilon
prediction).
"""
import numpy as np

from chatbrush.nn import autograd as ag
from chatbrush.nn.layers import Conv2d, GroupNorm, Linear, Module

ARCH_TAG = "cond-unet-v2"
TIME_DIM = 64
COND_DIM = 128


def sinusoidal_embedding(t, dim=TIME_DIM, max_period=10_000.0):
    """Standard sin/cos timestep features, float32 (B, dim)."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    half = dim // 2
    freqs = np.exp(-np.log(max_period) * np.arange(half) / half)
    ang = t[:, None] * freqs[None, :]
    return np.concatenate([np.sin(ang), np.cos(ang)], axis=1).astype(np.float32)


def avg_pool2x(x):
    n, c, h, w = x.shape
    return x.reshape(n, c, h // 2, 2, w // 2, 2).mean(axis=(3, 5))


class ResBlock(Module):
    def __init__(self, cin, cout, rng, dtype=np.float32):
        self.n1 = GroupNorm(min(8, cin) if cin % min(8, cin) == 0 else 1, cin, dtype=dtype)
        self.c1 = Conv2d(cin, cout, 3, rng, dtype=dtype)
        self.film = Linear(COND_DIM, 2 * cout, rng, init_scale=0.3, dtype=dtype)
        self.n2 = GroupNorm(min(8, cout), cout, dtype=dtype)
        self.c2 = Conv2d(cout, cout, 3, rng, dtype=dtype)
        self.skip = Conv2d(cin, cout, 1, rng, pad=0, bias=False, dtype=dtype) if cin != cout else None

    def forward(self, x, cond):
        h = self.c1(ag.silu(self.n1(x)))
        gamma_beta = self.film(cond)
        cout = h.shape[1]
        gamma = ag.reshape(gamma_beta[:, :cout], (-1, cout, 1, 1))
        beta = ag.reshape(gamma_beta[:, cout:], (-1, cout, 1, 1))
        h = ag.add(ag.mul(h, ag.add(gamma, 1.0)), beta)
        h = self.c2(ag.silu(self.n2(h)))
        return ag.add(h, x if self.skip is None else self.skip(x))


class CondUNet(Module):
    """Three-scale U-Net over (2 * latent channels) input."""

    def __init__(self, latent_channels=3, base=16, rng=None, dtype=np.float32):
        rng = rng if rng is not None else np.random.default_rng(0)
        c1, c2, c3 = base, base * 2, base * 4
        lc = latent_channels
        self.latent_channels = lc
        self.base = base
        self.t_proj = Linear(TIME_DIM, COND_DIM, rng, dtype=dtype)
        self.c_proj = Linear(64, COND_DIM, rng, dtype=dtype)
        self.stem = Conv2d(lc * 2, c1, 3, rng, dtype=dtype)
        self.enc1 = ResBlock(c1 + lc, c1, rng, dtype=dtype)
        self.down1 = Conv2d(c1, c2, 3, rng, stride=2, dtype=dtype)
        self.enc2 = ResBlock(c2 + lc, c2, rng, dtype=dtype)
        self.down2 = Conv2d(c2, c3, 3, rng, stride=2, dtype=dtype)
        self.mid = ResBlock(c3 + lc, c3, rng, dtype=dtype)
        self.up1 = Conv2d(c3, c2, 3, rng, dtype=dtype)
        self.dec1 = ResBlock(c2 * 2 + lc, c2, rng, dtype=dtype)
        self.up2 = Conv2d(c2, c1, 3, rng, dtype=dtype)
        self.dec2 = ResBlock(c1 * 2 + lc, c1, rng, dtype=dtype)
        self.out_norm = GroupNorm(min(8, c1), c1, dtype=dtype)
        self.head = Conv2d(c1, lc, 3, rng, init_scale=1e-4, dtype=dtype)
        self.eval_rows = 0  # denoiser evaluations, counted in batch rows

    def forward(self, z_t, t, c_img, c_txt):
        """z_t, c_img: (B, L, H, W) arrays; t: (B,) ints; c_txt: (B, 64)."""
        b = z_t.shape[0]
        self.eval_rows += b
        dtype = self.stem.w.dtype
        temb = ag.silu(self.t_proj(ag.Tensor(sinusoidal_embedding(t).astype(dtype))))
        cemb = ag.silu(self.c_proj(ag.Tensor(np.asarray(c_txt, dtype=dtype))))
        cond = ag.add(temb, cemb)

        ci64 = np.asarray(c_img, dtype=dtype)
        ci32 = avg_pool2x(ci64)
        ci16 = avg_pool2x(ci32)
        t64, t32, t16 = ag.Tensor(ci64), ag.Tensor(ci32), ag.Tensor(ci16)

        x = ag.Tensor(np.concatenate([np.asarray(z_t, dtype=dtype), ci64], axis=1))
        h1 = self.enc1(ag.concat([self.stem(x), t64], axis=1), cond)
        h2 = self.enc2(ag.concat([self.down1(h1), t32], axis=1), cond)
        hm = self.mid(ag.concat([self.down2(h2), t16], axis=1), cond)
        u1 = self.up1(ag.upsample_nearest2x(hm))
        d1 = self.dec1(ag.concat([u1, h2, t32], axis=1), cond)
        u2 = self.up2(ag.upsample_nearest2x(d1))
        d2 = self.dec2(ag.concat([u2, h1, t64], axis=1), cond)
        return self.head(ag.silu(self.out_norm(d2)))

    def predict(self, z_t, t, c_img, c_txt):
        with ag.no_grad():
            return self.forward(z_t, t, c_img, c_txt).data.copy()

    def arch_meta(self):
        return {"arch": ARCH_TAG, "latent_channels": self.latent_channels,
                "base": self.base}
