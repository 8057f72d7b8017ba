"""Variance schedule and the exact forward noising process."""
import hashlib
from dataclasses import dataclass, field

import numpy as np

from chatbrush import DataError


@dataclass(frozen=True)
class NoiseSchedule:
    betas: np.ndarray
    alphas: np.ndarray = field(init=False)
    alpha_bars: np.ndarray = field(init=False)  # index 0 is defined as 1

    def __post_init__(self):
        betas = np.asarray(self.betas, dtype=np.float64)
        if betas.ndim != 1 or len(betas) < 1:
            raise DataError("schedule needs a 1-D beta array")
        if not (betas[0] > 0 and betas[-1] < 1 and np.all(np.diff(betas) >= 0)):
            raise DataError("betas must satisfy 0 < beta_1 <= ... <= beta_T < 1")
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "alphas", 1.0 - betas)
        object.__setattr__(self, "alpha_bars",
                           np.concatenate([[1.0], np.cumprod(self.alphas)]))
        if not np.all(np.diff(self.alpha_bars) < 0):
            raise DataError("alpha_bar must be strictly decreasing")

    @property
    def T(self):
        return len(self.betas)

    def alpha_bar(self, t):
        """alpha_bar at step(s) t in [0, T]; alpha_bar(0) == 1."""
        return self.alpha_bars[np.asarray(t)]

    def content_hash(self):
        h = hashlib.sha256(self.betas.tobytes())
        return h.hexdigest()[:16]

    @classmethod
    def linear(cls, T=1000, beta_start=1e-4, beta_end=0.02):
        return cls(np.linspace(beta_start, beta_end, T))

    def to_meta(self):
        return {"T": self.T, "beta_start": float(self.betas[0]),
                "beta_end": float(self.betas[-1]), "hash": self.content_hash()}


def forward_diffuse(z0, t, eps, schedule):
    """z_t = sqrt(abar_t) z0 + sqrt(1 - abar_t) eps, exactly."""
    z0 = np.asarray(z0)
    eps = np.asarray(eps)
    if z0.shape != eps.shape:
        raise DataError(f"noise shape {eps.shape} != latent shape {z0.shape}")
    t_arr = np.asarray(t)
    if np.any(t_arr < 1) or np.any(t_arr > schedule.T):
        raise DataError(f"step t must be in [1, {schedule.T}]")
    ab = schedule.alpha_bar(t_arr).astype(z0.dtype)
    if t_arr.ndim > 0:
        ab = ab.reshape((-1,) + (1,) * (z0.ndim - 1))
    return np.sqrt(ab) * z0 + np.sqrt(1.0 - ab) * eps
