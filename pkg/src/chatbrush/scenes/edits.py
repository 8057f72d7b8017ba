"""Ground-truth edit application with exact frame conditions."""
from dataclasses import replace

from .types import (ADD_OBJECT, CHANGE_BACKGROUND, CHANGE_STYLE, MAX_OBJECTS,
                    RECOLOR, REMOVE_OBJECT, REPLACE_SHAPE, SceneError,
                    replace_object)


class SelectorMissError(SceneError):
    """The edit's selector matched no object in the scene."""


def resolve_selector(scene, selector):
    """Index of the first matching object (list order breaks ties)."""
    for i, obj in enumerate(scene.objects):
        if selector.matches(obj):
            return i
    raise SelectorMissError(f"no object matches selector {selector.describe()!r}")


def apply_edit(scene, edit):
    """Apply one edit; only the targeted attribute changes.

    Raises SelectorMissError when the target is absent and SceneError when
    the result would violate scene invariants.
    """
    scene.validate()
    edit.validate()
    if edit.kind == RECOLOR:
        idx = resolve_selector(scene, edit.selector)
        out = replace_object(scene, idx, color=edit.color)
    elif edit.kind == REPLACE_SHAPE:
        idx = resolve_selector(scene, edit.selector)
        out = replace_object(scene, idx, shape=edit.shape)
    elif edit.kind == CHANGE_BACKGROUND:
        out = replace(scene, background=edit.color)
    elif edit.kind == CHANGE_STYLE:
        out = replace(scene, style=edit.style)
    elif edit.kind == ADD_OBJECT:
        if len(scene.objects) >= MAX_OBJECTS:
            raise SceneError(f"cannot add: scene already has {MAX_OBJECTS} objects")
        if any(o.position == edit.obj.position for o in scene.objects):
            raise SceneError(f"cannot add: position {edit.obj.position!r} is occupied")
        out = replace(scene, objects=scene.objects + (edit.obj,))
    elif edit.kind == REMOVE_OBJECT:
        idx = resolve_selector(scene, edit.selector)
        if len(scene.objects) == 1:
            raise SceneError("cannot remove the only object in the scene")
        out = replace(scene, objects=scene.objects[:idx] + scene.objects[idx + 1:])
    else:
        raise SceneError(f"unknown edit kind {edit.kind!r}")
    out.validate()
    return out
