"""Seeded scene and edit sampling.

Scenes drawn here keep (shape, color) pairs distinct within a scene and
object colors distinct from the background, so the minimal selectors emitted
by sample_edit are always unambiguous — ambiguity handling belongs to the
dialogue engine, not to training data.
"""
import hashlib
import json

import numpy as np

from .edits import apply_edit
from .types import (ADD_OBJECT, CHANGE_BACKGROUND, CHANGE_STYLE, EDIT_KINDS,
                    MAX_OBJECTS, PALETTE, POSITIONS, RECOLOR, REMOVE_OBJECT,
                    REPLACE_SHAPE, SHAPES, SIZES, STYLES, EditOp, ObjectSpec,
                    SceneSpec, Selector)

_COLORS = tuple(PALETTE)
_STYLE_P = (0.55, 0.15, 0.15, 0.15)


def scene_id(scene):
    blob = json.dumps(scene.to_json(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def sample_scene(rng_seed):
    """Deterministic scene draw; same seed, same spec."""
    rng = np.random.default_rng(rng_seed)
    return sample_scene_rng(rng)


def sample_scene_rng(rng):
    background = _COLORS[rng.integers(len(_COLORS))]
    style = STYLES[rng.choice(len(STYLES), p=_STYLE_P)]
    n = int(rng.integers(1, MAX_OBJECTS + 1))
    cells = rng.choice(len(POSITIONS), size=n, replace=False)
    objects, used = [], set()
    for cell in cells:
        while True:
            shape = SHAPES[rng.integers(len(SHAPES))]
            color = _COLORS[rng.integers(len(_COLORS))]
            if color != background and (shape, color) not in used:
                break
        used.add((shape, color))
        objects.append(ObjectSpec(shape, color, SIZES[rng.integers(len(SIZES))],
                                  POSITIONS[cell]))
    scene = SceneSpec(background, style, tuple(objects))
    scene.validate()
    return scene


def minimal_selector(scene, index):
    """Smallest selector that uniquely picks scene.objects[index]."""
    obj = scene.objects[index]
    if sum(o.shape == obj.shape for o in scene.objects) == 1:
        return Selector(shape=obj.shape)
    if sum(o.color == obj.color for o in scene.objects) == 1:
        return Selector(color=obj.color)
    return Selector(shape=obj.shape, color=obj.color)


def sample_edit(scene, rng, kinds=None):
    """Draw a valid edit whose payload differs from the current value."""
    kinds = tuple(kinds) if kinds else EDIT_KINDS
    applicable = []
    for k in kinds:
        if k == ADD_OBJECT and len(scene.objects) >= MAX_OBJECTS:
            continue
        if k == REMOVE_OBJECT and len(scene.objects) < 2:
            continue
        applicable.append(k)
    kind = applicable[rng.integers(len(applicable))]

    if kind in (RECOLOR, REPLACE_SHAPE, REMOVE_OBJECT):
        idx = int(rng.integers(len(scene.objects)))
        sel = minimal_selector(scene, idx)
        obj = scene.objects[idx]
        if kind == RECOLOR:
            taken = {o.color for o in scene.objects} | {scene.background}
            options = [c for c in _COLORS if c not in taken]
            edit = EditOp(RECOLOR, selector=sel, color=options[rng.integers(len(options))])
        elif kind == REPLACE_SHAPE:
            taken = {o.shape for o in scene.objects}
            options = [s for s in SHAPES if s not in taken] or [s for s in SHAPES if s != obj.shape]
            edit = EditOp(REPLACE_SHAPE, selector=sel, shape=options[rng.integers(len(options))])
        else:
            edit = EditOp(REMOVE_OBJECT, selector=sel)
    elif kind == CHANGE_BACKGROUND:
        taken = {o.color for o in scene.objects} | {scene.background}
        options = [c for c in _COLORS if c not in taken]
        edit = EditOp(CHANGE_BACKGROUND, color=options[rng.integers(len(options))])
    elif kind == CHANGE_STYLE:
        options = [s for s in STYLES if s != scene.style]
        edit = EditOp(CHANGE_STYLE, style=options[rng.integers(len(options))])
    else:
        free = [p for p in POSITIONS if all(o.position != p for o in scene.objects)]
        taken = {(o.shape, o.color) for o in scene.objects}
        while True:
            shape = SHAPES[rng.integers(len(SHAPES))]
            color = _COLORS[rng.integers(len(_COLORS))]
            if color != scene.background and (shape, color) not in taken:
                break
        obj = ObjectSpec(shape, color, SIZES[rng.integers(len(SIZES))],
                         free[rng.integers(len(free))])
        edit = EditOp(ADD_OBJECT, obj=obj)

    apply_edit(scene, edit)  # must be applicable by construction
    return edit
