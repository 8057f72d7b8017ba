#!/usr/bin/env python3
"""Write a small random-weight checkpoint set for service-level tests."""
import sys

import numpy as np

from chatbrush.diffusion import new_stack, save_stack
from chatbrush.embed import EmbedModel, save_embed_checkpoint


def main(out_dir, base=8, seed=0):
    emb = EmbedModel(rng=np.random.default_rng(seed))
    emb.trained = True
    save_embed_checkpoint(f"{out_dir}/embed.npz", emb, {"note": "tiny test checkpoint"})
    stack = new_stack(emb, base=base, seed=seed + 1)
    stack.trained = True
    save_stack(f"{out_dir}/diffusion.npz", stack, extra_meta={"trained": True,
                                                              "resolution": 64})
    print(out_dir)


if __name__ == "__main__":
    main(sys.argv[1], *(int(a) for a in sys.argv[2:]))
