"""Shared fixtures: the trained acceptance artifacts.

The heavy artifacts (synthetic corpus, embedder, diffusion editor, dialogue
model) build once through the public CLI into artifacts/acceptance/ and are
reused across runs; delete the directory to force a rebuild.
"""
import json
import os
import sys

import pytest

PKG_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
ACCEPT_ROOT = os.path.join(PKG_ROOT, "artifacts", "acceptance")
DATA_DIR = os.path.join(ACCEPT_ROOT, "data")
CKPT_DIR = os.path.join(ACCEPT_ROOT, "ckpt")

# acceptance-scale corpus: 90% of pairs (the train split) stays >= 5000
ACCEPT_SPEC = {
    "seed": 1108,
    "n_pairs": 5800,
    "n_dialogues": 1600,
    "pair_kinds": "recolor,replace_shape",
    "embed": {"epochs": 8, "batch": 128, "seed": 1},
    "diffusion": {"steps": 3200, "batch": 16, "base": 16, "seed": 2},
    "dialogue": {"epochs": 12, "seed": 3},
}


def _entry(args):
    from chatbrush.cli import entry
    code = entry([str(a) for a in args])
    if code != 0:
        raise RuntimeError(f"cli {args[0]} failed with exit code {code}")


def _stamp(name):
    return os.path.join(ACCEPT_ROOT, f".{name}.done")


def _stage(name, args):
    if os.path.exists(_stamp(name)):
        return
    print(f"\n[acceptance artifacts] building stage: {name}", file=sys.stderr)
    _entry(args)
    with open(_stamp(name), "w") as f:
        json.dump(ACCEPT_SPEC, f)


def ensure_acceptance_artifacts():
    os.makedirs(ACCEPT_ROOT, exist_ok=True)
    spec = ACCEPT_SPEC
    _stage("data", ["synth-data", "--n-dialogues", spec["n_dialogues"],
                    "--n-pairs", spec["n_pairs"], "--seed", spec["seed"],
                    "--pair-kinds", spec["pair_kinds"], "--out", DATA_DIR])
    _stage("embed", ["train-embed", "--data", DATA_DIR, "--out", CKPT_DIR,
                     "--epochs", spec["embed"]["epochs"],
                     "--batch-size", spec["embed"]["batch"],
                     "--seed", spec["embed"]["seed"]])
    _stage("diffusion", ["train-diffusion", "--data", DATA_DIR,
                         "--embed", CKPT_DIR, "--out", CKPT_DIR,
                         "--steps", spec["diffusion"]["steps"],
                         "--batch-size", spec["diffusion"]["batch"],
                         "--base", spec["diffusion"]["base"],
                         "--seed", spec["diffusion"]["seed"]])
    _stage("dialogue", ["train-dialogue", "--data", DATA_DIR, "--out", CKPT_DIR,
                        "--epochs", spec["dialogue"]["epochs"],
                        "--seed", spec["dialogue"]["seed"]])
    return ACCEPT_ROOT


@pytest.fixture(scope="session")
def acceptance_artifacts():
    return ensure_acceptance_artifacts()


@pytest.fixture(scope="session")
def trained_stack(acceptance_artifacts):
    from chatbrush.diffusion import load_stack
    from chatbrush.embed import load_embed_checkpoint
    embedder, _ = load_embed_checkpoint(os.path.join(CKPT_DIR, "embed.npz"))
    stack, meta = load_stack(os.path.join(CKPT_DIR, "diffusion.npz"), embedder)
    return stack


@pytest.fixture(scope="session")
def trained_embedder(trained_stack):
    return trained_stack.embedder
