"""Deterministic slot extraction from edit utterances.

A token scan over closed vocabularies (colors, shapes, sizes, styles, grid
positions) plus the lexicon's verbs and referent phrases. No learned parts:
the same grammar generates the synthetic corpus, so extraction inverts it
exactly.
"""
import re
from dataclasses import dataclass, field

from chatbrush.scenes import (ADD_OBJECT, CHANGE_BACKGROUND, CHANGE_STYLE,
                              PALETTE, POSITIONS, RECOLOR, REMOVE_OBJECT,
                              REPLACE_SHAPE, SHAPES, SIZES, STYLES, EditOp,
                              ObjectSpec, Selector)

from . import lexicon as lex

_PUNCT = re.compile(r"[.,!?;:'\"()]")

_COLOR_SET = frozenset(PALETTE)
_SHAPE_SET = frozenset(SHAPES)
_SIZE_SET = frozenset(SIZES)
_STYLE_SET = frozenset(STYLES)
_ARTICLES = ("a", "an", "the")

# longest-match phrase table: positions, referents, vague payloads, forget markers
_PHRASES = sorted(
    [(tuple(p.split()), "position", p) for p in POSITIONS if " " in p]
    + [(tuple(p.split()), "referent", p) for p in lex.TARGET_REFERENTS]
    + [(tuple(p.split()), "vague", p) for p in lex.VAGUE_PAYLOADS]
    + [(tuple(p.split()), "forget", p) for p in lex.FORGET_MARKERS],
    key=lambda e: len(e[0]), reverse=True,
)

_VERB_GROUP = {w: g for g, words in lex.VERBS.items() for w in words}


def normalize(text):
    return _PUNCT.sub(" ", text.lower()).split()


@dataclass
class Extraction:
    """Raw slot values found in one utterance."""
    kind: str = None
    target: Selector = None
    color: str = None
    shape: str = None
    style: str = None
    size: str = None
    position: str = None
    forget: bool = False
    referent_used: bool = False
    vague_payload: bool = False
    editish: bool = False
    missing: tuple = ()
    noun_hints: tuple = ()
    # raw mention streams, used by the merge logic
    shape_mentions: list = field(default_factory=list)


def _scan_phrases(tokens):
    """Consume multi-word phrases; returns (annotations, consumed mask)."""
    found = []
    used = [False] * len(tokens)
    i = 0
    while i < len(tokens):
        matched = False
        for words, cat, value in _PHRASES:
            n = len(words)
            if tuple(tokens[i:i + n]) == words:
                found.append((i, cat, value))
                for j in range(i, i + n):
                    used[j] = True
                i += n
                matched = True
                break
        if not matched:
            i += 1
    return found, used


def _article_before(tokens, idx):
    """Nearest preceding article, skipping size/color adjectives."""
    j = idx - 1
    while j >= 0 and (tokens[j] in _SIZE_SET or tokens[j] in _COLOR_SET):
        j -= 1
    return tokens[j] if j >= 0 and tokens[j] in _ARTICLES else None


def extract(text):
    """Scan one utterance for edit slots; no state involved."""
    tokens = normalize(text)
    ex = Extraction()
    phrases, used = _scan_phrases(tokens)

    positions, wildcards = [], []
    for i, cat, value in phrases:
        if cat == "position":
            positions.append((i, value))
        elif cat == "referent":
            ex.referent_used = True
        elif cat == "vague":
            ex.vague_payload = True
        elif cat == "forget":
            ex.forget = True

    colors, shapes, sizes, styles = [], [], [], []
    verbs = set()
    nouns = set()
    has_background = False
    for i, tok in enumerate(tokens):
        if used[i]:
            continue
        if tok in _COLOR_SET:
            colors.append((i, tok))
        elif tok in _SHAPE_SET:
            shapes.append((i, tok))
        elif tok in _SIZE_SET:
            sizes.append((i, tok))
        elif tok in _STYLE_SET:
            styles.append((i, tok))
        elif tok == "center":
            positions.append((i, "center"))
        elif tok in lex.WILDCARD_NOUNS:
            wildcards.append(i)
        elif tok == "background":
            has_background = True
        elif tok in ("color", "colour", "shape", "style") and tok in _VERB_GROUP:
            verbs.add(_VERB_GROUP[tok])
            nouns.add("color" if tok in ("color", "colour") else tok)
        elif tok in ("shape", "style"):
            nouns.add(tok)
        elif tok in _VERB_GROUP:
            verbs.add(_VERB_GROUP[tok])

    positions.sort()
    ex.editish = bool(verbs or ex.referent_used or ex.vague_payload or has_background
                      or colors or shapes or styles or positions or nouns or wildcards)
    ex.size = sizes[0][1] if sizes else None
    ex.position = positions[0][1] if positions else None
    ex.style = styles[0][1] if styles else None
    ex.shape_mentions = [(i, s) for i, s in shapes]

    def adjacent_color(idx):
        for j, c in colors:
            k = j + 1
            while k < idx and tokens[k] in _SIZE_SET:
                k += 1
            if k == idx:
                return j, c
        return None

    # target candidate: first 'the'-determined shape mention or wildcard noun
    target = None
    consumed_color_idx = None
    target_shape_pos = None
    add_mode = "add" in verbs
    for i, s in shapes:
        if add_mode:
            break
        art = _article_before(tokens, i)
        if art == "the" or (art is None and len(shapes) >= 1):
            adj = adjacent_color(i)
            target = Selector(shape=s, color=adj[1] if adj else None)
            if adj:
                consumed_color_idx = adj[0]
            target_shape_pos = i
            break
    if target is None and wildcards and not add_mode:
        adj = adjacent_color(wildcards[0])
        if adj:
            target = Selector(color=adj[1])
            consumed_color_idx = adj[0]

    free_colors = [c for j, c in colors if j != consumed_color_idx]
    payload_shapes = [(i, s) for i, s in shapes if i != target_shape_pos]

    # kind decision, in precedence order
    if ex.style is not None or (nouns & {"style"} and not styles):
        ex.kind = CHANGE_STYLE
    elif has_background:
        ex.kind = CHANGE_BACKGROUND
    elif add_mode:
        ex.kind = ADD_OBJECT
    elif "remove" in verbs:
        ex.kind = REMOVE_OBJECT
    elif "replace" in verbs or len(shapes) >= 2 or (payload_shapes and (target or ex.referent_used)):
        ex.kind = REPLACE_SHAPE
    elif payload_shapes and not target and not free_colors:
        # bare "a star" style answer: payload shape without a target claim
        ex.kind = None
        ex.shape = payload_shapes[-1][1]
    elif "shape" in nouns:
        ex.kind = REPLACE_SHAPE
    elif "recolor" in verbs or free_colors or ("color" in nouns and not colors):
        ex.kind = RECOLOR
    elif ex.editish:
        ex.kind = None

    if ex.kind == ADD_OBJECT:
        ex.shape = shapes[0][1] if shapes else None
        ex.color = free_colors[0] if free_colors else None
    elif ex.kind == REPLACE_SHAPE:
        ex.target = target
        if payload_shapes:
            ex.shape = payload_shapes[-1][1]
        elif target is None and shapes:
            art = _article_before(tokens, shapes[0][0])
            if art in ("a", "an"):
                ex.shape = shapes[0][1]
            else:
                ex.target = Selector(shape=shapes[0][1])
    elif ex.kind == RECOLOR:
        ex.target = target
        ex.color = free_colors[-1] if free_colors else None
    elif ex.kind == CHANGE_BACKGROUND:
        ex.color = free_colors[-1] if free_colors else None
    elif ex.kind == REMOVE_OBJECT:
        ex.target = target
    elif ex.kind is None:
        ex.target = target
        if free_colors:
            ex.color = free_colors[-1]
    ex.noun_hints = tuple(sorted(nouns))
    return ex


def required_slots(kind):
    return lex.SLOT_SCHEMAS[kind]


def missing_slots(kind, slots):
    """Names of required slots still unfilled for `kind` given a slot dict."""
    if kind is None:
        out = []
        if slots.get("target") is None:
            out.append("target")
        if all(slots.get(k) is None for k in ("color", "shape", "style")):
            out.append("payload")
        return tuple(out)
    return tuple(s for s in required_slots(kind) if slots.get(s) is None)


def build_op(kind, slots):
    """Assemble the EditOp once every required slot is present."""
    if kind == RECOLOR:
        return EditOp(RECOLOR, selector=slots["target"], color=slots["color"])
    if kind == REPLACE_SHAPE:
        return EditOp(REPLACE_SHAPE, selector=slots["target"], shape=slots["shape"])
    if kind == CHANGE_BACKGROUND:
        return EditOp(CHANGE_BACKGROUND, color=slots["color"])
    if kind == CHANGE_STYLE:
        return EditOp(CHANGE_STYLE, style=slots["style"])
    if kind == ADD_OBJECT:
        obj = ObjectSpec(slots["shape"], slots["color"], slots.get("size") or "medium",
                         slots["position"])
        return EditOp(ADD_OBJECT, obj=obj)
    if kind == REMOVE_OBJECT:
        return EditOp(REMOVE_OBJECT, selector=slots["target"])
    raise ValueError(f"cannot build op for kind {kind!r}")
