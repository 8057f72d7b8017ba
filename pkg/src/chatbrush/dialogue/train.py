"""Seq2seq training and perplexity evaluation.

Perplexity is exp(mean NLL) over system-turn tokens only, teacher forced;
the padded positions never contribute. The unigram baseline shares the same
tokenization, so the two numbers are directly comparable.
"""
import numpy as np

from chatbrush import DataError
from chatbrush.embed.vocab import PAD, build_dialogue_vocab
from chatbrush.nn import autograd as ag
from chatbrush.nn.optim import Adam, clip_grad_norm
from chatbrush.nn.serialize import load_checkpoint, save_checkpoint

from .seq2seq import ARCH_TAG, Seq2SeqModel, dialogue_examples, encode_context


def _batch_nll(model, enc, dec_in, dec_out):
    """(sum NLL tensor, token count) over non-pad target positions."""
    logits = model.forward_logits(enc, dec_in)
    b, t, v = logits.shape
    flat = ag.reshape(logits, (b * t, v))
    targets = dec_out.reshape(-1)
    nll = ag.nll_per_row(flat, np.where(targets == PAD, 0, targets))
    mask = (targets != PAD).astype(logits.dtype)
    total = ag.tensor_sum(ag.mul(nll, ag.Tensor(mask)))
    return total, float(mask.sum())


def perplexity(model, dialogues, batch_size=64):
    """exp(mean token NLL) of system turns under teacher forcing."""
    if not dialogues:
        raise DataError("empty dialogue corpus")
    enc, dec_in, dec_out = dialogue_examples(dialogues, model.vocab)
    total, count = 0.0, 0.0
    with ag.no_grad():
        for lo in range(0, len(enc), batch_size):
            hi = min(lo + batch_size, len(enc))
            t, c = _batch_nll(model, enc[lo:hi], dec_in[lo:hi], dec_out[lo:hi])
            total += float(t.data)
            count += c
    return float(np.exp(total / count))


def unigram_perplexity(train_dialogues, eval_dialogues, vocab):
    """Laplace-smoothed unigram baseline over the same target tokens."""
    _, _, train_out = dialogue_examples(train_dialogues, vocab)
    _, _, eval_out = dialogue_examples(eval_dialogues, vocab)
    counts = np.zeros(len(vocab))
    toks = train_out[train_out != PAD]
    np.add.at(counts, toks, 1.0)
    probs = (counts + 1.0) / (counts.sum() + len(vocab))
    ev = eval_out[eval_out != PAD]
    return float(np.exp(-np.mean(np.log(probs[ev]))))


def train_seq2seq(dialogues, config=None, log=None):
    """Train the dialogue model; returns (model, report)."""
    cfg = {"epochs": 10, "batch_size": 32, "lr": 1e-3, "seed": 0, "clip": 1.0}
    cfg.update(config or {})
    if not dialogues:
        raise DataError("empty dialogue corpus")
    vocab = build_dialogue_vocab()
    model = Seq2SeqModel(vocab, rng=np.random.default_rng(cfg["seed"] + 1))
    enc, dec_in, dec_out = dialogue_examples(dialogues, vocab)
    opt = Adam(model.parameters(), lr=cfg["lr"])
    rng = np.random.default_rng(cfg["seed"])
    bs = min(cfg["batch_size"], len(enc))
    history = []
    for epoch in range(cfg["epochs"]):
        order = rng.permutation(len(enc))
        tot, ntok = 0.0, 0.0
        for lo in range(0, len(enc) - bs + 1, bs):
            idx = order[lo:lo + bs]
            total, count = _batch_nll(model, enc[idx], dec_in[idx], dec_out[idx])
            loss = ag.mul(total, 1.0 / count)
            opt.zero_grad()
            loss.backward()
            clip_grad_norm(opt.params, cfg["clip"])
            opt.step()
            tot += float(total.data)
            ntok += count
        history.append(float(np.exp(tot / ntok)))
        if log:
            log(f"epoch {epoch + 1}/{cfg['epochs']} train ppl {history[-1]:.3f}")
    model.trained = True
    report = {"train_ppl_history": history, "config": cfg,
              "n_examples": int(len(enc)), "vocab_hash": vocab.content_hash()}
    return model, report


def generate_reply(model, caption, turns, max_len=32):
    """Greedy reply to a dialogue context; deterministic, <= max_len tokens."""
    enc = np.array([encode_context(model.vocab, caption, turns)])
    return model.greedy_decode(enc, max_len=max_len)[0]


def save_dialogue_checkpoint(path, model, report=None):
    meta = {"arch": ARCH_TAG, "vocab_hash": model.vocab.content_hash(),
            "trained": model.trained, "report": report or {}}
    save_checkpoint(path, model.state_arrays(), meta)


def load_dialogue_checkpoint(path):
    meta, arrays = load_checkpoint(path, expect_arch=ARCH_TAG)
    vocab = build_dialogue_vocab()
    if meta["vocab_hash"] != vocab.content_hash():
        raise DataError("dialogue checkpoint vocabulary does not match this build")
    model = Seq2SeqModel(vocab)
    model.load_state(arrays)
    model.trained = bool(meta.get("trained"))
    return model, meta
