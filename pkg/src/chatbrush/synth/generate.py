"""Instruction and dialogue sample generation.

System turns are produced by running the rule engine live, so every sample
replays exactly: re-feeding the user turns through the engine reproduces the
stored system turns and the resolved instruction.
"""
from dataclasses import dataclass

import numpy as np

from chatbrush import DataError
from chatbrush.dialogue import DialogueState, ExplicitInstruction, Turn, respond
from chatbrush.scenes import EditOp, SceneSpec, apply_edit, caption, sample_edit, scene_id

from .textgen import AMBIGUITY_TAGS, TAG_FORGET, TAG_KINDS, TemplateTextGenerator

_DEFAULT_GEN = TemplateTextGenerator()


def _as_rng(rng_seed):
    if isinstance(rng_seed, np.random.Generator):
        return rng_seed
    return np.random.default_rng(rng_seed)


def gen_instruction(scene, rng_seed, kinds=None, textgen=None):
    """Draw (edit, instruction text, edited caption) for a scene."""
    rng = _as_rng(rng_seed)
    textgen = textgen or _DEFAULT_GEN
    op = sample_edit(scene, rng, kinds=kinds)
    text = textgen.instruction(caption(scene), op, rng)
    edited_caption = caption(apply_edit(scene, op))
    return op, text, edited_caption


@dataclass
class DialogueSample:
    caption: str
    turns: list
    resolved_instruction: ExplicitInstruction
    ambiguity_tag: str
    scene_ref: str
    scene: SceneSpec
    edit: EditOp  # the underlying edit (the forgotten one for forget samples)

    def to_json(self):
        return {
            "caption": self.caption,
            "turns": [t.to_json() for t in self.turns],
            "resolved_instruction": self.resolved_instruction.to_json(),
            "ambiguity_tag": self.ambiguity_tag,
            "scene_ref": self.scene_ref,
            "scene": self.scene.to_json(),
            "edit": self.edit.to_json(),
        }

    @classmethod
    def from_json(cls, d):
        return cls(
            caption=d["caption"],
            turns=[Turn.from_json(t) for t in d["turns"]],
            resolved_instruction=ExplicitInstruction.from_json(d["resolved_instruction"]),
            ambiguity_tag=d["ambiguity_tag"],
            scene_ref=d["scene_ref"],
            scene=SceneSpec.from_json(d["scene"]),
            edit=EditOp.from_json(d["edit"]),
        )


def gen_dialogue(scene, edit, ambiguity_tag, rng_seed, textgen=None):
    """Generate one dialogue sample around a known edit."""
    rng = _as_rng(rng_seed)
    textgen = textgen or _DEFAULT_GEN
    if ambiguity_tag not in AMBIGUITY_TAGS:
        raise DataError(f"unknown ambiguity tag {ambiguity_tag!r}")
    if edit.kind not in TAG_KINDS[ambiguity_tag]:
        raise DataError(f"tag {ambiguity_tag!r} does not support edit kind {edit.kind!r}")
    apply_edit(scene, edit)  # must be applicable up front

    cap = caption(scene)
    user_turns = textgen.dialogue_user_turns(cap, edit, ambiguity_tag, rng)
    state = DialogueState()
    final = None
    for text in user_turns:
        _, _, instr = respond(state, text)
        if instr is not None:
            final = instr
            if instr.forget:
                state.mark_forgotten()
            else:
                state.mark_applied()

    if final is None:
        raise DataError("generated dialogue resolved no instruction")
    if ambiguity_tag == TAG_FORGET:
        if not final.forget:
            raise DataError("forget dialogue did not end in a forget instruction")
    elif final.op != edit:
        raise DataError(f"dialogue resolved {final.op} instead of {edit}")

    return DialogueSample(
        caption=cap,
        turns=list(state.history),
        resolved_instruction=final,
        ambiguity_tag=ambiguity_tag,
        scene_ref=scene_id(scene),
        scene=scene,
        edit=edit,
    )


def validate_dialogue_sample(sample):
    """Check the stored invariants; raises DataError on violation."""
    turns = sample.turns
    if not turns or turns[0].speaker != "user":
        raise DataError("dialogue must start with a user turn")
    for a, b in zip(turns, turns[1:]):
        if a.speaker == b.speaker:
            raise DataError("dialogue speakers must alternate")
    if sample.ambiguity_tag != "direct":
        if not any(t.speaker == "system" and t.text.endswith("?") for t in turns):
            raise DataError("non-direct dialogue lacks a clarifying question")
    if sample.resolved_instruction.op is not None:
        apply_edit(sample.scene, sample.resolved_instruction.op)
    elif sample.ambiguity_tag != TAG_FORGET:
        raise DataError("only forget dialogues may resolve to a forget instruction")


def replay_dialogue(sample):
    """Re-run the user turns through the rule engine; returns the final
    instruction and the replayed turn list."""
    state = DialogueState()
    final = None
    for turn in sample.turns:
        if turn.speaker != "user":
            continue
        _, _, instr = respond(state, turn.text)
        if instr is not None:
            final = instr
            if instr.forget:
                state.mark_forgotten()
            else:
                state.mark_applied()
    return final, list(state.history)
