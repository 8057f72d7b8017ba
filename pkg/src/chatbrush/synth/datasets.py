"""Dataset construction: edit pairs + dialogues written as JSONL shards.

Layout under the output directory:

    manifest.json     counts, seed, split ranges, resolved config echo
    dialogues.jsonl   one DialogueSample per line
    pairs.jsonl       one EditPair record per line (image fields are
                      relative PNG paths)
    images/           pair PNGs, pair_<idx>_orig.png / _edit.png

Generation is a pure function of (counts, seed, config): rerunning with the
same arguments reproduces every byte.
"""
import json
import os
from dataclasses import dataclass

import numpy as np

from chatbrush import DataError
from chatbrush.imaging import save_png
from chatbrush.scenes import (EditOp, SceneSpec, apply_edit, caption, render,
                              sample_edit, sample_scene)

from .generate import DialogueSample, gen_dialogue, gen_instruction
from .textgen import (TAG_AMBIGUOUS, TAG_DIRECT, TAG_FORGET, TAG_KINDS,
                      TAG_MISSING, TemplateTextGenerator)

SCHEMA_VERSION = 1
TAG_MIX = ((TAG_DIRECT, 0.4), (TAG_AMBIGUOUS, 0.25), (TAG_MISSING, 0.25),
           (TAG_FORGET, 0.1))


@dataclass
class EditPair:
    original_image: str  # relative PNG path
    edited_image: str
    caption: str
    edited_caption: str
    instruction: str
    edit: EditOp
    scene: SceneSpec
    filter_score: float = None

    def to_json(self):
        return {
            "original_image": self.original_image,
            "edited_image": self.edited_image,
            "caption": self.caption,
            "edited_caption": self.edited_caption,
            "instruction": self.instruction,
            "edit": self.edit.to_json(),
            "scene": self.scene.to_json(),
            "filter_score": self.filter_score,
        }

    @classmethod
    def from_json(cls, d):
        return cls(
            original_image=d["original_image"],
            edited_image=d["edited_image"],
            caption=d["caption"],
            edited_caption=d["edited_caption"],
            instruction=d["instruction"],
            edit=EditOp.from_json(d["edit"]),
            scene=SceneSpec.from_json(d["scene"]),
            filter_score=d.get("filter_score"),
        )

    def validate(self):
        edited = apply_edit(self.scene, self.edit)
        if caption(self.scene) != self.caption:
            raise DataError("pair caption does not match its scene")
        if caption(edited) != self.edited_caption:
            raise DataError("edited caption does not match apply_edit output")


def _dumps(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_jsonl(path, records):
    with open(path, "w") as f:
        for r in records:
            f.write(_dumps(r) + "\n")


def read_jsonl(path):
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]


def split_ranges(n, train=0.9, val=0.05):
    n_val = int(np.floor(n * val))
    n_test = n_val
    n_train = n - n_val - n_test
    return {"train": [0, n_train], "val": [n_train, n_train + n_val],
            "test": [n_train + n_val, n]}


def make_pair(index, seed, resolution=64, kinds=None, out_dir=None, textgen=None):
    """One deterministic edit pair; writes PNGs when out_dir is given."""
    rng = np.random.default_rng([seed, 1, index])
    scene = sample_scene([seed, 0, index])
    op, instruction, edited_caption = gen_instruction(scene, rng, kinds=kinds,
                                                      textgen=textgen)
    edited_scene = apply_edit(scene, op)
    orig_rel = f"images/pair_{index:06d}_orig.png"
    edit_rel = f"images/pair_{index:06d}_edit.png"
    if out_dir is not None:
        save_png(os.path.join(out_dir, orig_rel), render(scene, resolution))
        save_png(os.path.join(out_dir, edit_rel), render(edited_scene, resolution))
    return EditPair(
        original_image=orig_rel,
        edited_image=edit_rel,
        caption=caption(scene),
        edited_caption=edited_caption,
        instruction=instruction,
        edit=op,
        scene=scene,
    )


def make_dialogue(index, seed, textgen=None):
    rng = np.random.default_rng([seed, 3, index])
    scene = sample_scene([seed, 2, index])
    tags, weights = zip(*TAG_MIX)
    tag = tags[int(rng.choice(len(tags), p=np.array(weights) / sum(weights)))]
    edit = sample_edit(scene, rng, kinds=TAG_KINDS[tag])
    return gen_dialogue(scene, edit, tag, rng, textgen=textgen)


def build_datasets(n_dialogues, n_pairs, seed, out_dir, resolution=64,
                   pair_kinds=None, textgen=None, log=None):
    """Write the full synthetic corpus; returns the manifest dict."""
    if n_dialogues < 1 or n_pairs < 1:
        raise DataError("n_dialogues and n_pairs must be >= 1")
    os.makedirs(os.path.join(out_dir, "images"), exist_ok=True)
    textgen = textgen or TemplateTextGenerator()

    pairs = []
    for i in range(n_pairs):
        pairs.append(make_pair(i, seed, resolution=resolution, kinds=pair_kinds,
                               out_dir=out_dir, textgen=textgen))
        if log and (i + 1) % 1000 == 0:
            log(f"pairs {i + 1}/{n_pairs}")
    write_jsonl(os.path.join(out_dir, "pairs.jsonl"), (p.to_json() for p in pairs))

    dialogues = []
    for i in range(n_dialogues):
        dialogues.append(make_dialogue(i, seed, textgen=textgen))
        if log and (i + 1) % 1000 == 0:
            log(f"dialogues {i + 1}/{n_dialogues}")
    write_jsonl(os.path.join(out_dir, "dialogues.jsonl"),
                (d.to_json() for d in dialogues))

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "seed": seed,
        "resolution": resolution,
        "counts": {"dialogues": n_dialogues, "pairs": n_pairs},
        "pair_kinds": sorted(pair_kinds) if pair_kinds else None,
        "splits": {
            "dialogues": split_ranges(n_dialogues),
            "pairs": split_ranges(n_pairs),
        },
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as f:
        f.write(_dumps(manifest) + "\n")
    return manifest


def load_pairs(data_dir):
    return [EditPair.from_json(d) for d in read_jsonl(os.path.join(data_dir, "pairs.jsonl"))]


def load_dialogues(data_dir):
    return [DialogueSample.from_json(d)
            for d in read_jsonl(os.path.join(data_dir, "dialogues.jsonl"))]


def load_manifest(data_dir):
    with open(os.path.join(data_dir, "manifest.json")) as f:
        return json.load(f)


def pair_slice(pairs, manifest, split, kind="pairs"):
    lo, hi = manifest["splits"][kind][split]
    return pairs[lo:hi]
