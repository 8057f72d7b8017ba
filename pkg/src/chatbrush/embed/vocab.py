"""Token vocabulary over the closed caption/instruction/dialogue grammar.

Built by enumerating every word the generators can emit (scene vocabulary,
instruction templates, engine reply templates), so generated text tokenizes
with zero UNKs. The null-condition token has a reserved id used as the text
embedding's learned null row.
"""
import hashlib

from chatbrush.scenes import PALETTE, POSITIONS, SHAPES, SIZES, STYLES

PAD, BOS, EOS, UNK, NULL = 0, 1, 2, 3, 4
PAD_TOKEN, BOS_TOKEN, EOS_TOKEN, UNK_TOKEN = "<pad>", "<bos>", "<eos>", "<unk>"
NULL_TOKEN = "<null>"
USER_TOKEN, SYSTEM_TOKEN = "<usr>", "<sys>"

NULL_TEXT = NULL_TOKEN  # callers pass this sentinel to request the null condition

MAX_LEN = 32

# glue words used by the caption grammar and engine replies that are not
# covered by any template scan
_GLUE = (
    "a", "an", "the", "at", "on", "and", "in", "of", "to", "background",
    "style", "i", "will", "okay", "done", "restored", "previous", "image",
    "which", "object", "would", "you", "like", "change", "what", "should",
    "be", "become", "kind", "add", "color", "new", "where", "put", "exactly",
    "remove", "nothing", "there", "is", "yet", "undo", "tell", "me", "how",
    "edit", "start", "over", "have", "mind", "let's", "forget", "last",
)


def _word_inventory():
    from chatbrush.synth.templates import word_inventory as synth_words
    words = set(_GLUE)
    words.update(PALETTE)
    words.update(SHAPES)
    words.update(SIZES)
    words.update(STYLES)
    for p in POSITIONS:
        words.update(p.split())
    words.update(synth_words())
    return words


class Vocab:
    def __init__(self, words=None, extra_specials=()):
        words = sorted(_word_inventory() if words is None else set(words))
        specials = [PAD_TOKEN, BOS_TOKEN, EOS_TOKEN, UNK_TOKEN, NULL_TOKEN]
        specials += list(extra_specials)
        self.id_to_token = specials + [w for w in words if w not in specials]
        self.token_to_id = {t: i for i, t in enumerate(self.id_to_token)}
        assert self.token_to_id[PAD_TOKEN] == PAD and self.token_to_id[NULL_TOKEN] == NULL

    def __len__(self):
        return len(self.id_to_token)

    def content_hash(self):
        blob = "\n".join(self.id_to_token).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def tokenize(self, text, max_len=MAX_LEN):
        """Lowercase, punctuation-split, BOS/EOS framed, padded id sequence."""
        from chatbrush.dialogue.slots import normalize
        ids = [BOS]
        for w in normalize(text):
            ids.append(self.token_to_id.get(w, UNK))
            if len(ids) == max_len - 1:
                break
        ids.append(EOS)
        ids.extend([PAD] * (max_len - len(ids)))
        return ids[:max_len]

    def tokenize_raw(self, text):
        """Unpadded, unframed ids (dialogue model contexts)."""
        from chatbrush.dialogue.slots import normalize
        return [self.token_to_id.get(w, UNK) for w in normalize(text)]

    def decode(self, ids, stop_at_eos=True):
        words = []
        for i in ids:
            if i == EOS and stop_at_eos:
                break
            if i in (PAD, BOS):
                continue
            words.append(self.id_to_token[int(i)])
        return " ".join(words)


def build_vocab():
    return Vocab()


def build_dialogue_vocab():
    """Shared vocabulary plus speaker markers for the seq2seq model."""
    return Vocab(extra_specials=(USER_TOKEN, SYSTEM_TOKEN))
