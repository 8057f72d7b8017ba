"""Caption grammar: scene -> sentence and its exact inverse.

The grammar is a closed template over the scene vocabulary, e.g.

    a small red circle at the center and a large blue star at the top left
    on a white background in sepia style

Every object contributes size, color, shape, and position in list order; the
style clause is present exactly when the style is not plain. Because all
slot vocabularies are closed and ordering is fixed, caption() is injective
on valid scenes and parse_caption() recovers the spec exactly.
"""
from chatbrush import DataError
from .types import PALETTE, POSITIONS, SHAPES, SIZES, STYLES, ObjectSpec, SceneSpec


class CaptionParseError(DataError):
    def __init__(self, message, position, token):
        super().__init__(f"{message} (token {position}: {token!r})")
        self.position = position
        self.token = token


_TWO_WORD_POSITIONS = {tuple(p.split()) for p in POSITIONS if " " in p}


def caption(scene):
    scene.validate()
    parts = [f"a {o.size} {o.color} {o.shape} at the {o.position}" for o in scene.objects]
    text = " and ".join(parts) + f" on a {scene.background} background"
    if scene.style != "plain":
        text += f" in {scene.style} style"
    return text


class _TokenStream:
    def __init__(self, text):
        self.tokens = text.split()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def peek2(self):
        return self.tokens[self.i + 1] if self.i + 1 < len(self.tokens) else None

    def next(self, expect=None, what=None):
        tok = self.peek()
        if tok is None:
            raise CaptionParseError(f"unexpected end of caption, expected {expect or what}",
                                    self.i, "<end>")
        if expect is not None and tok != expect:
            raise CaptionParseError(f"expected {expect!r}", self.i, tok)
        self.i += 1
        return tok

    def next_from(self, vocab, what):
        tok = self.next(what=what)
        if tok not in vocab:
            raise CaptionParseError(f"unknown {what}", self.i - 1, tok)
        return tok

    def next_position(self):
        a = self.peek()
        if a is None:
            raise CaptionParseError("unexpected end of caption, expected position", self.i, "<end>")
        if (a, self.peek2()) in _TWO_WORD_POSITIONS:
            self.i += 2
            return f"{a} {self.tokens[self.i - 1]}"
        if a == "center":
            self.i += 1
            return a
        raise CaptionParseError("unknown position", self.i, a)


def parse_caption(text):
    ts = _TokenStream(text)
    objects = []
    while True:
        ts.next(expect="a")
        size = ts.next_from(SIZES, "size")
        color = ts.next_from(PALETTE, "color")
        shape = ts.next_from(SHAPES, "shape")
        ts.next(expect="at")
        ts.next(expect="the")
        position = ts.next_position()
        objects.append(ObjectSpec(shape, color, size, position))
        sep = ts.next(what="'and' or 'on'")
        if sep == "on":
            break
        if sep != "and":
            raise CaptionParseError("expected 'and' or 'on'", ts.i - 1, sep)
    ts.next(expect="a")
    background = ts.next_from(PALETTE, "background color")
    ts.next(expect="background")
    style = "plain"
    if ts.peek() is not None:
        ts.next(expect="in")
        style = ts.next_from(STYLES, "style")
        ts.next(expect="style")
    if ts.peek() is not None:
        raise CaptionParseError("trailing tokens after caption", ts.i, ts.peek())
    scene = SceneSpec(background, style, tuple(objects))
    scene.validate()
    return scene
