"""Surface templates for synthetic instructions and user-side dialogue turns.

Every template stays inside the closed grammar vocabulary, so the slot
extractor inverts each rendered utterance. Placeholders: {t} target
description, {c} color, {s} shape, {z} size, {p} position, {st} style.
"""
from chatbrush.scenes import (ADD_OBJECT, CHANGE_BACKGROUND, CHANGE_STYLE,
                              RECOLOR, REMOVE_OBJECT, REPLACE_SHAPE)

INSTRUCTION_TEMPLATES = {
    RECOLOR: (
        "make the {t} {c}",
        "turn the {t} {c}",
        "change the {t} to {c}",
        "paint the {t} {c}",
        "color the {t} {c}",
        "recolor the {t} to {c}",
    ),
    REPLACE_SHAPE: (
        "replace the {t} with a {s}",
        "change the {t} into a {s}",
        "turn the {t} into a {s}",
        "swap the {t} for a {s}",
        "make the {t} a {s}",
    ),
    CHANGE_BACKGROUND: (
        "change the background to {c}",
        "make the background {c}",
        "set the background to {c}",
        "turn the background {c}",
        "paint the background {c}",
    ),
    CHANGE_STYLE: (
        "apply the {st} style",
        "make it {st}",
        "switch to the {st} style",
        "use the {st} style",
        "give it the {st} style",
        "change the style to {st}",
    ),
    ADD_OBJECT: (
        "add a {z} {c} {s} at the {p}",
        "put a {z} {c} {s} at the {p}",
        "place a {z} {c} {s} at the {p}",
        "draw a {z} {c} {s} at the {p}",
        "insert a {z} {c} {s} at the {p}",
    ),
    REMOVE_OBJECT: (
        "remove the {t}",
        "delete the {t}",
        "erase the {t}",
        "get rid of the {t}",
        "take out the {t}",
    ),
}

# ambiguous_referent openings: a referent with no antecedent, payload vague
VAGUE_OPENINGS = {
    RECOLOR: (
        "change it to something else",
        "make it a different color",
        "change that one to something else",
        "i want it in a different color",
        "give it another color",
    ),
    REPLACE_SHAPE: (
        "turn it into something else",
        "change its shape",
        "give it a different shape",
        "turn that one into a different shape",
    ),
    REMOVE_OBJECT: (
        "remove it",
        "get rid of that one",
        "delete it",
        "remove that one",
    ),
}

# missing_slot openings: (template, name of the one slot left out)
PARTIAL_OPENINGS = {
    RECOLOR: (
        ("recolor the {t}", "color"),
        ("change the color of the {t}", "color"),
        ("i want the {t} in a different color", "color"),
        ("give the {t} another color", "color"),
    ),
    REPLACE_SHAPE: (
        ("replace the {t}", "shape"),
        ("change the shape of the {t}", "shape"),
        ("turn the {t} into a different shape", "shape"),
        ("give the {t} a new shape", "shape"),
    ),
    CHANGE_BACKGROUND: (
        ("change the background", "color"),
        ("i want a different background", "color"),
        ("make the background a different color", "color"),
    ),
    CHANGE_STYLE: (
        ("change the style", "style"),
        ("apply a different style", "style"),
        ("use another style", "style"),
    ),
    ADD_OBJECT: (
        ("add a {z} {c} {s}", "position"),
        ("put a {z} {c} {s} somewhere", "position"),
        ("draw a {z} {c} {s}", "position"),
        ("add a {z} {s} at the {p}", "color"),
        ("put a {z} {s} at the {p}", "color"),
    ),
}

# answers that supply both target and payload (after a combined question)
FULL_ANSWERS = {
    RECOLOR: (
        "the {t}, to {c}",
        "make the {t} {c}",
        "the {t}, {c} please",
        "turn the {t} {c}",
    ),
    REPLACE_SHAPE: (
        "the {t}, into a {s}",
        "turn the {t} into a {s}",
        "replace the {t} with a {s}",
    ),
    REMOVE_OBJECT: (
        "the {t}",
        "i mean the {t}",
        "the {t} please",
    ),
}

# answers that supply a single missing slot value
VALUE_ANSWERS = {
    "color": ("{c}", "{c} please", "make it {c}", "i would like {c}"),
    "shape": ("a {s}", "a {s} please", "make it a {s}"),
    "style": ("{st}", "the {st} style", "{st} please"),
    "position": ("at the {p}", "the {p}", "put it at the {p}"),
}

FORGET_UTTERANCES = (
    "forget that",
    "undo that",
    "undo the last edit",
    "forget the last edit",
    "go back to the previous image",
    "revert that change",
)

CHATTER_UTTERANCES = (
    "hello",
    "hi there",
    "thanks",
    "that looks great",
)


def op_fields(op):
    """Template fields for an edit op."""
    f = {}
    if op.selector is not None:
        f["t"] = op.selector.describe()
    if op.color is not None:
        f["c"] = op.color
    if op.shape is not None:
        f["s"] = op.shape
    if op.style is not None:
        f["st"] = op.style
    if op.obj is not None:
        f.update(s=op.obj.shape, c=op.obj.color, z=op.obj.size, p=op.obj.position)
    return f


def word_inventory():
    """Every word any template can emit, for vocabulary construction."""
    words = set()
    groups = [tpl for tpls in INSTRUCTION_TEMPLATES.values() for tpl in tpls]
    groups += [tpl for tpls in VAGUE_OPENINGS.values() for tpl in tpls]
    groups += [tpl for kind in PARTIAL_OPENINGS.values() for tpl, _ in kind]
    groups += [tpl for tpls in FULL_ANSWERS.values() for tpl in tpls]
    groups += [tpl for tpls in VALUE_ANSWERS.values() for tpl in tpls]
    groups += list(FORGET_UTTERANCES) + list(CHATTER_UTTERANCES)
    for tpl in groups:
        for w in tpl.replace(",", " ").split():
            if not (w.startswith("{") and w.endswith("}")):
                words.add(w)
    return words
