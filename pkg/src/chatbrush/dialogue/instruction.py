"""Explicit instructions: the unambiguous directive handed to the editor."""
from dataclasses import dataclass

from chatbrush.scenes import EditOp


@dataclass(frozen=True)
class ExplicitInstruction:
    """A canonical directive; either an edit op or the forget marker."""
    text: str
    op: EditOp = None
    forget: bool = False

    def __post_init__(self):
        if self.forget == (self.op is not None):
            raise ValueError("instruction must carry exactly one of op / forget")

    def to_json(self):
        return {"text": self.text,
                "op": self.op.to_json() if self.op else None,
                "forget": self.forget}

    @classmethod
    def from_json(cls, d):
        op = EditOp.from_json(d["op"]) if d.get("op") else None
        return cls(text=d["text"], op=op, forget=bool(d.get("forget")))
