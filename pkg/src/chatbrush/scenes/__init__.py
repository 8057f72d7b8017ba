from .edits import SelectorMissError, apply_edit, resolve_selector
from .grammar import CaptionParseError, caption, parse_caption
from .render import RESOLUTIONS, object_bbox, object_mask, render
from .sample import minimal_selector, sample_edit, sample_scene, sample_scene_rng, scene_id
from .types import (ADD_OBJECT, CHANGE_BACKGROUND, CHANGE_STYLE, EDIT_KINDS,
                    MAX_OBJECTS, PALETTE, POSITIONS, RECOLOR, REMOVE_OBJECT,
                    REPLACE_SHAPE, SHAPES, SIZES, STYLES, EditOp, ObjectSpec,
                    SceneError, SceneSpec, Selector, grid_cell)

__all__ = [
    "ADD_OBJECT", "CHANGE_BACKGROUND", "CHANGE_STYLE", "EDIT_KINDS",
    "MAX_OBJECTS", "PALETTE", "POSITIONS", "RECOLOR", "REMOVE_OBJECT",
    "REPLACE_SHAPE", "RESOLUTIONS", "SHAPES", "SIZES", "STYLES",
    "CaptionParseError", "EditOp", "ObjectSpec", "SceneError", "SceneSpec",
    "Selector", "SelectorMissError", "apply_edit", "caption", "grid_cell",
    "minimal_selector", "object_bbox", "object_mask", "parse_caption",
    "render", "resolve_selector", "sample_edit", "sample_scene",
    "sample_scene_rng", "scene_id",
]
