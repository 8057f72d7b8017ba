"""Rule-based dialogue engine: ambiguity detection, clarification, forget.

Drives the live system. The engine asks at most one clarifying question per
turn, never more questions than an instruction has slots, and every emitted
instruction is a canonical form that re-parses to the same edit op.
"""
from dataclasses import dataclass, field

from chatbrush.scenes import RECOLOR, REPLACE_SHAPE, Selector

from . import phrasing
from .instruction import ExplicitInstruction
from .slots import build_op, extract, missing_slots, required_slots

DIRECT = "direct"
AMBIGUOUS = "ambiguous"
FORGET = "forget"
CHATTER = "chatter"

_SLOT_NAMES = ("target", "color", "shape", "style", "size", "position")


@dataclass
class Turn:
    speaker: str
    text: str

    def to_json(self):
        return {"speaker": self.speaker, "text": self.text}

    @classmethod
    def from_json(cls, d):
        return cls(d["speaker"], d["text"])


@dataclass
class ClassifiedIntent:
    kind: str
    op: object = None
    missing: tuple = ()
    extraction: object = None


@dataclass
class PendingOp:
    kind: str = None
    slots: dict = field(default_factory=dict)
    questions_asked: int = 0

    def to_json(self):
        d = {k: v for k, v in self.slots.items() if v is not None and k != "target"}
        if self.slots.get("target") is not None:
            d["target"] = self.slots["target"].to_json()
        return {"kind": self.kind, "slots": d, "questions_asked": self.questions_asked}

    @classmethod
    def from_json(cls, d):
        slots = dict(d["slots"])
        if slots.get("target") is not None:
            slots["target"] = Selector.from_json(slots["target"])
        return cls(d["kind"], slots, d["questions_asked"])


@dataclass
class DialogueState:
    history: list = field(default_factory=list)
    pending: PendingOp = None
    resolved: bool = False
    edit_count: int = 0
    last_target: Selector = None

    def mark_applied(self):
        self.edit_count += 1

    def mark_forgotten(self):
        self.edit_count = max(0, self.edit_count - 1)

    def to_json(self):
        return {
            "history": [t.to_json() for t in self.history],
            "pending": self.pending.to_json() if self.pending else None,
            "resolved": self.resolved,
            "edit_count": self.edit_count,
            "last_target": self.last_target.to_json() if self.last_target else None,
        }

    @classmethod
    def from_json(cls, d):
        return cls(
            history=[Turn.from_json(t) for t in d["history"]],
            pending=PendingOp.from_json(d["pending"]) if d.get("pending") else None,
            resolved=bool(d["resolved"]),
            edit_count=int(d["edit_count"]),
            last_target=Selector.from_json(d["last_target"]) if d.get("last_target") else None,
        )


def detect_ambiguity(user_text, state):
    """Classify one utterance against the current dialogue state."""
    ex = extract(user_text)
    if ex.forget:
        return ClassifiedIntent(FORGET, extraction=ex)
    if not ex.editish:
        return ClassifiedIntent(CHATTER, extraction=ex)
    target = ex.target
    if target is None and ex.referent_used and state.last_target is not None:
        target = state.last_target
    slots = {"target": target, "color": ex.color, "shape": ex.shape,
             "style": ex.style, "size": ex.size, "position": ex.position}
    missing = missing_slots(ex.kind, slots)
    if ex.kind is not None and not missing:
        return ClassifiedIntent(DIRECT, op=build_op(ex.kind, slots), extraction=ex)
    return ClassifiedIntent(AMBIGUOUS, missing=missing, extraction=ex)


def _question_limit(kind):
    return len(required_slots(kind)) if kind is not None else 2


def _merge(pending, intent):
    """Fold an answer's extraction into the pending op; True if progress."""
    ex = intent.extraction
    progress = False
    if pending.kind is None and ex.kind is not None:
        pending.kind = ex.kind
        progress = True
    values = {"target": ex.target, "color": ex.color, "shape": ex.shape,
              "style": ex.style, "size": ex.size, "position": ex.position}
    for name in _SLOT_NAMES:
        if values[name] is not None and pending.slots.get(name) is None:
            pending.slots[name] = values[name]
            progress = True
    if pending.kind is None:
        if pending.slots.get("target") is not None:
            if pending.slots.get("color") is not None:
                pending.kind = RECOLOR
            elif pending.slots.get("shape") is not None:
                pending.kind = REPLACE_SHAPE
    return progress


def _emit(state, op=None, forget=False):
    instr = phrasing.instruction_for(op=op, forget=forget)
    state.pending = None
    state.resolved = True
    if op is not None and op.selector is not None:
        state.last_target = op.selector
    reply = phrasing.FORGET_ACK if forget else phrasing.confirmation(instr)
    return reply, instr


def respond(state, user_text):
    """Advance the dialogue one exchange.

    Returns (system Turn, state, instruction-or-None); state is updated in
    place. The caller applies emitted instructions and reports back through
    state.mark_applied() / state.mark_forgotten().
    """
    state.history.append(Turn("user", user_text))
    state.resolved = False
    intent = detect_ambiguity(user_text, state)
    instr = None

    if intent.kind == FORGET:
        if state.edit_count == 0:
            reply = phrasing.FORGET_REFUSAL
            state.pending = None
        else:
            reply, instr = _emit(state, forget=True)
    elif intent.kind == DIRECT:
        reply, instr = _emit(state, op=intent.op)
    elif state.pending is not None:
        pending = state.pending
        progress = _merge(pending, intent) if intent.kind in (AMBIGUOUS, CHATTER) else False
        still_missing = missing_slots(pending.kind, pending.slots)
        if pending.kind is not None and not still_missing:
            reply, instr = _emit(state, op=build_op(pending.kind, pending.slots))
        elif pending.questions_asked < _question_limit(pending.kind) and (
                progress or intent.kind == AMBIGUOUS):
            pending.questions_asked += 1
            reply = phrasing.question_for(pending.kind, still_missing, _SlotsView(pending.slots))
        else:
            state.pending = None
            reply = phrasing.RESET_REPLY
    elif intent.kind == AMBIGUOUS:
        ex = intent.extraction
        slots = {"target": ex.target, "color": ex.color, "shape": ex.shape,
                 "style": ex.style, "size": ex.size, "position": ex.position}
        if slots["target"] is None and ex.referent_used and state.last_target is not None:
            slots["target"] = state.last_target
        state.pending = PendingOp(kind=ex.kind, slots=slots, questions_asked=1)
        reply = phrasing.question_for(ex.kind, intent.missing, _SlotsView(slots))
    else:
        reply = phrasing.CHATTER_REPLY

    turn = Turn("system", reply)
    state.history.append(turn)
    return turn, state, instr


class _SlotsView:
    """Attribute view over a slot dict for the phrasing templates."""

    def __init__(self, slots):
        self.target = slots.get("target")
