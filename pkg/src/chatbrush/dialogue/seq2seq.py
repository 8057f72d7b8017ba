"""Small encoder-decoder transformer over dialogue contexts.

2 encoder + 2 decoder layers, d=128, 4 heads, pre-LN, sinusoidal positions.
Contexts are caption + speaker-tagged turns; targets are single system turns.
"""
import numpy as np

from chatbrush import ModelError
from chatbrush.embed.vocab import BOS, EOS, PAD, SYSTEM_TOKEN, USER_TOKEN
from chatbrush.nn import autograd as ag
from chatbrush.nn.layers import Embedding, LayerNorm, Linear, Module, ModuleList

ARCH_TAG = "dialogue-seq2seq-v1"
D_MODEL = 128
N_HEADS = 4
D_FF = 256
MAX_CTX = 96
MAX_TGT = 32
NEG_INF = -1e9


def positional_encoding(length, dim=D_MODEL):
    pos = np.arange(length)[:, None].astype(np.float64)
    i = np.arange(dim // 2)[None, :]
    ang = pos / np.power(10_000.0, 2 * i / dim)
    out = np.zeros((length, dim), dtype=np.float32)
    out[:, 0::2] = np.sin(ang)
    out[:, 1::2] = np.cos(ang)
    return out


class MultiHeadAttention(Module):
    def __init__(self, rng, dtype=np.float32):
        self.wq = Linear(D_MODEL, D_MODEL, rng, dtype=dtype)
        self.wk = Linear(D_MODEL, D_MODEL, rng, dtype=dtype)
        self.wv = Linear(D_MODEL, D_MODEL, rng, dtype=dtype)
        self.wo = Linear(D_MODEL, D_MODEL, rng, dtype=dtype)

    @staticmethod
    def _split(t, b, n):
        dh = D_MODEL // N_HEADS
        return ag.transpose(ag.reshape(t, (b, n, N_HEADS, dh)), (0, 2, 1, 3))

    def forward(self, x, memory, mask):
        """mask: additive (B or 1, 1, T, S) ndarray, 0 or NEG_INF."""
        b, t = x.shape[0], x.shape[1]
        s = memory.shape[1]
        dh = D_MODEL // N_HEADS
        q = self._split(self.wq(x), b, t)
        k = self._split(self.wk(memory), b, s)
        v = self._split(self.wv(memory), b, s)
        scores = ag.mul(ag.matmul(q, ag.transpose(k, (0, 1, 3, 2))), 1.0 / np.sqrt(dh))
        if mask is not None:
            scores = ag.add(scores, ag.Tensor(mask.astype(scores.dtype)))
        attn = ag.softmax(scores, axis=-1)
        ctx = ag.matmul(attn, v)
        merged = ag.reshape(ag.transpose(ctx, (0, 2, 1, 3)), (b, t, D_MODEL))
        return self.wo(merged)


class FeedForward(Module):
    def __init__(self, rng, dtype=np.float32):
        self.l1 = Linear(D_MODEL, D_FF, rng, dtype=dtype)
        self.l2 = Linear(D_FF, D_MODEL, rng, dtype=dtype)

    def forward(self, x):
        return self.l2(ag.silu(self.l1(x)))


class EncoderLayer(Module):
    def __init__(self, rng, dtype=np.float32):
        self.ln1 = LayerNorm(D_MODEL, dtype=dtype)
        self.attn = MultiHeadAttention(rng, dtype=dtype)
        self.ln2 = LayerNorm(D_MODEL, dtype=dtype)
        self.ff = FeedForward(rng, dtype=dtype)

    def forward(self, x, pad_mask):
        h = self.ln1(x)
        x = ag.add(x, self.attn(h, h, pad_mask))
        return ag.add(x, self.ff(self.ln2(x)))


class DecoderLayer(Module):
    def __init__(self, rng, dtype=np.float32):
        self.ln1 = LayerNorm(D_MODEL, dtype=dtype)
        self.self_attn = MultiHeadAttention(rng, dtype=dtype)
        self.ln2 = LayerNorm(D_MODEL, dtype=dtype)
        self.cross_attn = MultiHeadAttention(rng, dtype=dtype)
        self.ln3 = LayerNorm(D_MODEL, dtype=dtype)
        self.ff = FeedForward(rng, dtype=dtype)

    def forward(self, x, memory, self_mask, cross_mask):
        h = self.ln1(x)
        x = ag.add(x, self.self_attn(h, h, self_mask))
        x = ag.add(x, self.cross_attn(self.ln2(x), memory, cross_mask))
        return ag.add(x, self.ff(self.ln3(x)))


class Seq2SeqModel(Module):
    def __init__(self, vocab, rng=None, dtype=np.float32):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.vocab = vocab
        self.embed = Embedding(len(vocab), D_MODEL, rng, std=0.02, dtype=dtype)
        self.enc_layers = ModuleList([EncoderLayer(rng, dtype=dtype) for _ in range(2)])
        self.dec_layers = ModuleList([DecoderLayer(rng, dtype=dtype) for _ in range(2)])
        self.enc_norm = LayerNorm(D_MODEL, dtype=dtype)
        self.dec_norm = LayerNorm(D_MODEL, dtype=dtype)
        self.lm_head = Linear(D_MODEL, len(vocab), rng, dtype=dtype)
        self.trained = False
        self._pos = positional_encoding(max(MAX_CTX, MAX_TGT))

    def encode(self, enc_ids):
        b, s = enc_ids.shape
        x = ag.add(self.embed(enc_ids), ag.Tensor(self._pos[None, :s]))
        pad = np.where(enc_ids == PAD, NEG_INF, 0.0)[:, None, None, :]
        for layer in self.enc_layers:
            x = layer(x, pad)
        return self.enc_norm(x), pad

    def forward_logits(self, enc_ids, dec_in_ids):
        enc_ids = np.asarray(enc_ids)
        dec_in_ids = np.asarray(dec_in_ids)
        memory, enc_pad = self.encode(enc_ids)
        b, t = dec_in_ids.shape
        causal = np.triu(np.full((t, t), NEG_INF), k=1)[None, None]
        dec_pad = np.where(dec_in_ids == PAD, NEG_INF, 0.0)[:, None, None, :]
        self_mask = causal + dec_pad
        x = ag.add(self.embed(dec_in_ids), ag.Tensor(self._pos[None, :t]))
        for layer in self.dec_layers:
            x = layer(x, memory, self_mask, enc_pad)
        return self.lm_head(self.dec_norm(x))

    def greedy_decode(self, enc_ids, max_len=MAX_TGT):
        """Deterministic generation, at most max_len tokens."""
        if not self.trained:
            raise ModelError("dialogue model is untrained; run train-dialogue first")
        enc_ids = np.atleast_2d(np.asarray(enc_ids))
        out = [[BOS] for _ in range(enc_ids.shape[0])]
        done = [False] * enc_ids.shape[0]
        with ag.no_grad():
            for _ in range(max_len):
                dec_in = np.array([seq + [PAD] * (max_len + 1 - len(seq)) for seq in out])
                logits = self.forward_logits(enc_ids, dec_in).data
                for i, seq in enumerate(out):
                    if done[i]:
                        continue
                    nxt = int(np.argmax(logits[i, len(seq) - 1]))
                    seq.append(nxt)
                    if nxt == EOS:
                        done[i] = True
                if all(done):
                    break
        return [self.vocab.decode(seq[1:]) for seq in out]


def encode_context(vocab, caption, turns, max_ctx=MAX_CTX):
    """Caption + speaker-tagged turns, truncated to the most recent tokens."""
    usr, sys_ = vocab.token_to_id[USER_TOKEN], vocab.token_to_id[SYSTEM_TOKEN]
    ids = vocab.tokenize_raw(caption)
    for t in turns:
        ids.append(usr if t.speaker == "user" else sys_)
        ids.extend(vocab.tokenize_raw(t.text))
    ids = ids[-(max_ctx):]
    return ids + [PAD] * (max_ctx - len(ids))


def encode_target(vocab, text, max_tgt=MAX_TGT):
    """(decoder input, decoder output) id rows, teacher forced."""
    ids = vocab.tokenize_raw(text)[:max_tgt - 1] + [EOS]
    dec_in = [BOS] + ids[:-1]
    pad = [PAD] * (max_tgt - len(ids))
    return dec_in + pad, ids + pad


def dialogue_examples(dialogues, vocab, max_ctx=MAX_CTX, max_tgt=MAX_TGT):
    """(enc, dec_in, dec_out) rows: one example per system turn."""
    enc, dec_in, dec_out = [], [], []
    for d in dialogues:
        for i, turn in enumerate(d.turns):
            if turn.speaker != "system":
                continue
            enc.append(encode_context(vocab, d.caption, d.turns[:i], max_ctx))
            di, do = encode_target(vocab, turn.text, max_tgt)
            dec_in.append(di)
            dec_out.append(do)
    return np.array(enc), np.array(dec_in), np.array(dec_out)
