"""Text generation backends for the synthetic corpus.

The deterministic template backend is the default. An HTTP adapter for an
external completion endpoint implements the same interface by assembling a
task head plus 20 in-context examples per request; it is opt-in and never
used by tests or pipelines unless configured explicitly.
"""
from abc import ABC, abstractmethod

import requests

from chatbrush import DataError
from chatbrush.scenes import (ADD_OBJECT, CHANGE_BACKGROUND, CHANGE_STYLE,
                              RECOLOR, REMOVE_OBJECT, REPLACE_SHAPE, caption,
                              sample_edit, sample_scene)

from . import templates as T

TAG_DIRECT = "direct"
TAG_AMBIGUOUS = "ambiguous_referent"
TAG_MISSING = "missing_slot"
TAG_FORGET = "forget"

AMBIGUITY_TAGS = (TAG_DIRECT, TAG_AMBIGUOUS, TAG_MISSING, TAG_FORGET)

TAG_KINDS = {
    TAG_DIRECT: (RECOLOR, REPLACE_SHAPE, CHANGE_BACKGROUND, CHANGE_STYLE,
                 ADD_OBJECT, REMOVE_OBJECT),
    TAG_AMBIGUOUS: (RECOLOR, REPLACE_SHAPE, REMOVE_OBJECT),
    TAG_MISSING: (RECOLOR, REPLACE_SHAPE, CHANGE_BACKGROUND, CHANGE_STYLE,
                  ADD_OBJECT),
    TAG_FORGET: (RECOLOR, REPLACE_SHAPE, CHANGE_BACKGROUND, CHANGE_STYLE,
                 ADD_OBJECT, REMOVE_OBJECT),
}


class TextGenerator(ABC):
    """User-side text for instructions and dialogue turns."""

    @abstractmethod
    def instruction(self, scene_caption, op, rng):
        """One imperative instruction realising `op`."""

    @abstractmethod
    def dialogue_user_turns(self, scene_caption, op, tag, rng):
        """All user utterances of a dialogue with the given ambiguity tag."""


def _pick(rng, options):
    return options[int(rng.integers(len(options)))]


class TemplateTextGenerator(TextGenerator):
    """Deterministic grammar over the closed template set."""

    def instruction(self, scene_caption, op, rng):
        return _pick(rng, T.INSTRUCTION_TEMPLATES[op.kind]).format(**T.op_fields(op))

    def dialogue_user_turns(self, scene_caption, op, tag, rng):
        fields = T.op_fields(op)
        if tag == TAG_DIRECT:
            return [self.instruction(scene_caption, op, rng)]
        if tag == TAG_AMBIGUOUS:
            opening = _pick(rng, T.VAGUE_OPENINGS[op.kind])
            answer = _pick(rng, T.FULL_ANSWERS[op.kind]).format(**fields)
            return [opening, answer]
        if tag == TAG_MISSING:
            opening_tpl, missing = _pick(rng, T.PARTIAL_OPENINGS[op.kind])
            answer = _pick(rng, T.VALUE_ANSWERS[missing]).format(**fields)
            return [opening_tpl.format(**fields), answer]
        if tag == TAG_FORGET:
            inner_tag = TAG_MISSING if op.kind in TAG_KINDS[TAG_MISSING] else TAG_AMBIGUOUS
            if op.kind in TAG_KINDS[TAG_AMBIGUOUS] and rng.integers(2) == 0:
                inner_tag = TAG_AMBIGUOUS
            turns = self.dialogue_user_turns(scene_caption, op, inner_tag, rng)
            return turns + [_pick(rng, T.FORGET_UTTERANCES)]
        raise DataError(f"unknown ambiguity tag {tag!r}")


INSTRUCTION_HEAD = (
    "Generate a modification instruction for the image described by the caption."
)
DIALOGUE_HEAD = (
    "Generate a dialogue in which a user instructs the system to edit the image "
    "described by the caption. The user may start vague; the system asks for "
    "missing details before confirming."
)


def build_example_library(size=500, seed=1234):
    """Deterministic (caption, instruction) example pool for prompt assembly."""
    import numpy as np
    gen = TemplateTextGenerator()
    rng = np.random.default_rng(seed)
    out = []
    for i in range(size):
        scene = sample_scene(seed * 100_003 + i)
        op = sample_edit(scene, rng)
        out.append((caption(scene), gen.instruction(caption(scene), op, rng)))
    return out


def assemble_prompt(head, examples, query_caption):
    blocks = [head, ""]
    for cap, instr in examples:
        blocks.append(f"Caption: {cap}")
        blocks.append(f"Instruction: {instr}")
        blocks.append("")
    blocks.append(f"Caption: {query_caption}")
    blocks.append("Instruction:")
    return "\n".join(blocks)


class HttpTextGenerator(TextGenerator):
    """Adapter for an external completion endpoint (opt-in).

    Sends a head + 20 sampled in-context examples per request. Falls back to
    nothing: errors surface as DataError so callers can skip or retry.
    """

    def __init__(self, url, model, examples=None, n_examples=20, timeout=30,
                 session=None):
        self.url = url
        self.model = model
        self.examples = examples if examples is not None else build_example_library()
        self.n_examples = n_examples
        self.timeout = timeout
        self.session = session or requests.Session()
        self._fallback = TemplateTextGenerator()

    def _complete(self, prompt):
        try:
            resp = self.session.post(
                self.url,
                json={"model": self.model, "prompt": prompt, "max_tokens": 64,
                      "temperature": 0.7},
                timeout=self.timeout,
            )
            resp.raise_for_status()
            return resp.json()["choices"][0]["text"]
        except (requests.RequestException, KeyError, ValueError) as e:
            raise DataError(f"text generation endpoint failed: {e}") from e

    def _sample_examples(self, rng):
        idx = rng.choice(len(self.examples), size=min(self.n_examples, len(self.examples)),
                         replace=False)
        return [self.examples[i] for i in idx]

    def instruction(self, scene_caption, op, rng):
        prompt = assemble_prompt(INSTRUCTION_HEAD, self._sample_examples(rng), scene_caption)
        text = self._complete(prompt).strip().splitlines()
        if not text or not text[0].strip():
            raise DataError("text generation endpoint returned no instruction")
        return text[0].strip().lower()

    def dialogue_user_turns(self, scene_caption, op, tag, rng):
        # Only the user side is delegated; the rule engine still produces
        # system turns, so replies that do not realise `op` fail validation
        # downstream rather than corrupting the corpus.
        if tag != TAG_DIRECT:
            return self._fallback.dialogue_user_turns(scene_caption, op, tag, rng)
        return [self.instruction(scene_caption, op, rng)]
