"""Versioned lexicon: referent terms, verbs, and slot schemas.

Loaded from the packaged data file so tests can pin its exact content.
"""
import json
from importlib import resources


def _load():
    path = resources.files("chatbrush.dialogue").joinpath("data/lexicon.json")
    return json.loads(path.read_text())


LEXICON = _load()

VERSION = LEXICON["version"]
TARGET_REFERENTS = tuple(LEXICON["target_referents"])
VAGUE_PAYLOADS = tuple(LEXICON["vague_payloads"])
FORGET_MARKERS = tuple(LEXICON["forget_markers"])
WILDCARD_NOUNS = tuple(LEXICON["wildcard_nouns"])
VERBS = {k: tuple(v) for k, v in LEXICON["verbs"].items()}
SLOT_HINTS = dict(LEXICON["slot_hints"])
SLOT_SCHEMAS = {k: tuple(v) for k, v in LEXICON["slot_schemas"].items()}

ALL_VERBS = tuple(w for group in VERBS.values() for w in group)
