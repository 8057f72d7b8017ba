"""The assembled editing stack: denoiser + schedule + codec + embedder."""
from dataclasses import dataclass, field

import numpy as np

from chatbrush import DataError
from chatbrush.embed import EmbedModel
from chatbrush.nn.serialize import load_checkpoint, save_checkpoint

from .codec import IDENTITY, LatentCodec
from .schedule import NoiseSchedule
from .unet import ARCH_TAG, CondUNet


@dataclass
class EditorStack:
    unet: CondUNet
    schedule: NoiseSchedule
    codec: LatentCodec
    embedder: EmbedModel
    trained: bool = False
    null_text_embedding: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.null_text_embedding is None:
            self.null_text_embedding = self.embedder.null_embedding()

    def meta(self):
        return {
            "arch": ARCH_TAG,
            "unet": self.unet.arch_meta(),
            "schedule": self.schedule.to_meta(),
            "codec": self.codec.to_meta(),
            "embedder_vocab": self.embedder.vocab.content_hash(),
            "trained": self.trained,
        }


def new_stack(embedder, base=16, schedule=None, codec=None, seed=0):
    codec = codec or LatentCodec(IDENTITY)
    schedule = schedule or NoiseSchedule.linear()
    unet = CondUNet(latent_channels=codec.latent_channels, base=base,
                    rng=np.random.default_rng(seed))
    return EditorStack(unet=unet, schedule=schedule, codec=codec, embedder=embedder)


def save_stack(path, stack, extra_meta=None):
    meta = stack.meta()
    meta.update(extra_meta or {})
    arrays = stack.unet.state_arrays()
    arrays["__null_text__"] = stack.null_text_embedding
    save_checkpoint(path, arrays, meta)


def load_stack(path, embedder, codec=None):
    meta, arrays = load_checkpoint(path, expect_arch=ARCH_TAG)
    if meta["embedder_vocab"] != embedder.vocab.content_hash():
        raise DataError("diffusion checkpoint was trained against a different vocabulary")
    if codec is None:
        if meta["codec"]["mode"] != IDENTITY:
            raise DataError("checkpoint needs a tiny_autoencoder codec; pass one explicitly")
        codec = LatentCodec(IDENTITY)
    if codec.mode != meta["codec"]["mode"]:
        raise DataError(f"checkpoint expects codec mode {meta['codec']['mode']!r}")
    schedule = NoiseSchedule.linear(meta["schedule"]["T"], meta["schedule"]["beta_start"],
                                    meta["schedule"]["beta_end"])
    if schedule.content_hash() != meta["schedule"]["hash"]:
        raise DataError("schedule hash mismatch in checkpoint")
    unet = CondUNet(latent_channels=meta["unet"]["latent_channels"],
                    base=meta["unet"]["base"], rng=np.random.default_rng(0))
    null = arrays.pop("__null_text__")
    unet.load_state(arrays)
    return EditorStack(unet=unet, schedule=schedule, codec=codec, embedder=embedder,
                       trained=bool(meta.get("trained")),
                       null_text_embedding=np.asarray(null)), meta
