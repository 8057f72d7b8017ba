"""Scene domain types: palette, object/scene specs, edit operations.

The palette is a closed 12-name vocabulary. RGB components are multiples of
1/16 so that the inverted style (1 - channel) is exact in float32.
"""
from dataclasses import dataclass, field, replace

from chatbrush import DataError


class SceneError(DataError):
    """Invalid scene, object, or edit specification."""


# name -> (r, g, b), all components k/16
PALETTE = {
    "white": (1.0, 1.0, 1.0),
    "black": (0.0, 0.0, 0.0),
    "gray": (0.5, 0.5, 0.5),
    "red": (0.875, 0.125, 0.125),
    "green": (0.125, 0.625, 0.1875),
    "blue": (0.125, 0.25, 0.875),
    "yellow": (0.9375, 0.875, 0.125),
    "orange": (0.9375, 0.5, 0.0625),
    "purple": (0.5, 0.125, 0.625),
    "pink": (0.9375, 0.5625, 0.6875),
    "brown": (0.5625, 0.3125, 0.125),
    "cyan": (0.125, 0.75, 0.8125),
}

SHAPES = ("circle", "square", "triangle", "star", "heart")
SIZES = ("small", "medium", "large")
STYLES = ("plain", "sepia", "inverted", "night")

# row-major 3x3 grid
POSITIONS = (
    "top left", "top center", "top right",
    "middle left", "center", "middle right",
    "bottom left", "bottom center", "bottom right",
)

MAX_OBJECTS = 4


def grid_cell(position):
    """(row, col) of a named grid position."""
    i = POSITIONS.index(position)
    return i // 3, i % 3


@dataclass(frozen=True)
class ObjectSpec:
    shape: str
    color: str
    size: str
    position: str

    def validate(self):
        if self.shape not in SHAPES:
            raise SceneError(f"unknown shape {self.shape!r}")
        if self.color not in PALETTE:
            raise SceneError(f"unknown color {self.color!r}")
        if self.size not in SIZES:
            raise SceneError(f"unknown size {self.size!r}")
        if self.position not in POSITIONS:
            raise SceneError(f"unknown position {self.position!r}")

    def to_json(self):
        return {"shape": self.shape, "color": self.color,
                "size": self.size, "position": self.position}

    @classmethod
    def from_json(cls, d):
        obj = cls(d["shape"], d["color"], d["size"], d["position"])
        obj.validate()
        return obj


@dataclass(frozen=True)
class SceneSpec:
    background: str
    style: str
    objects: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))

    def validate(self):
        if self.background not in PALETTE:
            raise SceneError(f"unknown background color {self.background!r}")
        if self.style not in STYLES:
            raise SceneError(f"unknown style {self.style!r}")
        if not 1 <= len(self.objects) <= MAX_OBJECTS:
            raise SceneError(f"scene must have 1..{MAX_OBJECTS} objects, got {len(self.objects)}")
        seen = set()
        for obj in self.objects:
            obj.validate()
            if obj.position in seen:
                raise SceneError(f"duplicate object position {obj.position!r}")
            seen.add(obj.position)

    def to_json(self):
        return {"background": self.background, "style": self.style,
                "objects": [o.to_json() for o in self.objects]}

    @classmethod
    def from_json(cls, d):
        scene = cls(d["background"], d["style"],
                    tuple(ObjectSpec.from_json(o) for o in d["objects"]))
        scene.validate()
        return scene


@dataclass(frozen=True)
class Selector:
    """Object predicate over shape and/or color; None fields are wildcards."""
    shape: str = None
    color: str = None

    def validate(self):
        if self.shape is None and self.color is None:
            raise SceneError("selector needs a shape or a color")
        if self.shape is not None and self.shape not in SHAPES:
            raise SceneError(f"unknown selector shape {self.shape!r}")
        if self.color is not None and self.color not in PALETTE:
            raise SceneError(f"unknown selector color {self.color!r}")

    def matches(self, obj):
        return ((self.shape is None or obj.shape == self.shape)
                and (self.color is None or obj.color == self.color))

    def describe(self):
        if self.shape and self.color:
            return f"{self.color} {self.shape}"
        return self.shape or f"{self.color} object"

    def to_json(self):
        return {"shape": self.shape, "color": self.color}

    @classmethod
    def from_json(cls, d):
        sel = cls(d.get("shape"), d.get("color"))
        sel.validate()
        return sel


RECOLOR = "recolor"
REPLACE_SHAPE = "replace_shape"
CHANGE_BACKGROUND = "change_background"
CHANGE_STYLE = "change_style"
ADD_OBJECT = "add_object"
REMOVE_OBJECT = "remove_object"

EDIT_KINDS = (RECOLOR, REPLACE_SHAPE, CHANGE_BACKGROUND, CHANGE_STYLE,
              ADD_OBJECT, REMOVE_OBJECT)

_REQUIRED = {
    RECOLOR: ("selector", "color"),
    REPLACE_SHAPE: ("selector", "shape"),
    CHANGE_BACKGROUND: ("color",),
    CHANGE_STYLE: ("style",),
    ADD_OBJECT: ("obj",),
    REMOVE_OBJECT: ("selector",),
}


@dataclass(frozen=True)
class EditOp:
    kind: str
    selector: Selector = None
    color: str = None
    shape: str = None
    style: str = None
    obj: ObjectSpec = None

    def validate(self):
        if self.kind not in EDIT_KINDS:
            raise SceneError(f"unknown edit kind {self.kind!r}")
        for f in _REQUIRED[self.kind]:
            if getattr(self, f) is None:
                raise SceneError(f"{self.kind} edit requires {f!r}")
        if self.selector is not None:
            self.selector.validate()
        if self.color is not None and self.color not in PALETTE:
            raise SceneError(f"unknown color {self.color!r}")
        if self.shape is not None and self.shape not in SHAPES:
            raise SceneError(f"unknown shape {self.shape!r}")
        if self.style is not None and self.style not in STYLES:
            raise SceneError(f"unknown style {self.style!r}")
        if self.obj is not None:
            self.obj.validate()

    def to_json(self):
        d = {"kind": self.kind}
        if self.selector is not None:
            d["selector"] = self.selector.to_json()
        for f in ("color", "shape", "style"):
            if getattr(self, f) is not None:
                d[f] = getattr(self, f)
        if self.obj is not None:
            d["object"] = self.obj.to_json()
        return d

    @classmethod
    def from_json(cls, d):
        op = cls(
            kind=d["kind"],
            selector=Selector.from_json(d["selector"]) if d.get("selector") else None,
            color=d.get("color"),
            shape=d.get("shape"),
            style=d.get("style"),
            obj=ObjectSpec.from_json(d["object"]) if d.get("object") else None,
        )
        op.validate()
        return op


def replace_object(scene, index, **changes):
    objs = list(scene.objects)
    objs[index] = replace(objs[index], **changes)
    return replace(scene, objects=tuple(objs))
