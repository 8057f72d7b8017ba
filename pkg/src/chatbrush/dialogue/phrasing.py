"""Canonical instruction rendering plus the engine's fixed reply templates.

The canonical forms round-trip through the slot extractor, which is what
lets generated dialogues be replayed exactly.
"""
from chatbrush.scenes import (ADD_OBJECT, CHANGE_BACKGROUND, CHANGE_STYLE,
                              RECOLOR, REMOVE_OBJECT, REPLACE_SHAPE)

from .instruction import ExplicitInstruction

FORGET_TEXT = "forget the last edit"

CONFIRM_PREFIX = "okay, i will "
FORGET_ACK = "done, i restored the previous image."
FORGET_REFUSAL = "there is nothing to undo yet."
CHATTER_REPLY = "tell me how you would like to edit the image."
RESET_REPLY = "let's start over. tell me the edit you have in mind."


def render_op(op):
    if op.kind == RECOLOR:
        return f"recolor the {op.selector.describe()} to {op.color}"
    if op.kind == REPLACE_SHAPE:
        return f"replace the {op.selector.describe()} with a {op.shape}"
    if op.kind == CHANGE_BACKGROUND:
        return f"change the background to {op.color}"
    if op.kind == CHANGE_STYLE:
        return f"apply the {op.style} style"
    if op.kind == ADD_OBJECT:
        o = op.obj
        return f"add a {o.size} {o.color} {o.shape} at the {o.position}"
    if op.kind == REMOVE_OBJECT:
        return f"remove the {op.selector.describe()}"
    raise ValueError(f"cannot render edit kind {op.kind!r}")


def instruction_for(op=None, forget=False):
    if forget:
        return ExplicitInstruction(text=FORGET_TEXT, forget=True)
    return ExplicitInstruction(text=render_op(op), op=op)


def confirmation(instr):
    return CONFIRM_PREFIX + instr.text + "."


def question_for(kind, missing, slots):
    """One clarifying question naming every currently missing slot."""
    target_txt = slots.target.describe() if slots.target else "object"
    if "target" in missing:
        if len(missing) > 1:
            return "which object would you like to change, and to what?"
        if kind == REMOVE_OBJECT:
            return "which object should i remove?"
        return "which object should i change?"
    if kind == RECOLOR or (kind is None and "color" in missing):
        return f"what color should the {target_txt} be?"
    if kind == REPLACE_SHAPE:
        return f"what shape should the {target_txt} become?"
    if kind == CHANGE_BACKGROUND:
        return "what color should the background be?"
    if kind == CHANGE_STYLE:
        return "which style would you like?"
    if kind == ADD_OBJECT:
        if "shape" in missing:
            return "what kind of object should i add?"
        if "color" in missing:
            return "what color should the new object be?"
        return "where should i put the new object?"
    return "what would you like me to change, exactly?"
