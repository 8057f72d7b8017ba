"""Seq2seq dialogue model: perplexity analytics, decoding bounds."""
import numpy as np
import pytest

from chatbrush import DataError, ModelError
from chatbrush.dialogue import (MAX_TGT, Seq2SeqModel, dialogue_examples,
                                perplexity, unigram_perplexity)
from chatbrush.embed.vocab import build_dialogue_vocab
from chatbrush.nn import autograd as ag
from chatbrush.synth.datasets import make_dialogue


@pytest.fixture(scope="module")
def vocab():
    return build_dialogue_vocab()


@pytest.fixture(scope="module")
def dialogues():
    return [make_dialogue(i, seed=37) for i in range(40)]


class UniformModel:
    """Assigns uniform probability to every vocab token."""

    def __init__(self, vocab):
        self.vocab = vocab

    def forward_logits(self, enc, dec_in):
        b, t = np.asarray(dec_in).shape
        return ag.Tensor(np.zeros((b, t, len(self.vocab)), dtype=np.float64))


class OracleModel:
    """Assigns probability ~1 to every gold token (peeks at the targets)."""

    def __init__(self, vocab, dialogues):
        self.vocab = vocab
        _, dec_in, dec_out = dialogue_examples(dialogues, vocab)
        self._lookup = {tuple(i): o for i, o in zip(dec_in.tolist(), dec_out.tolist())}

    def forward_logits(self, enc, dec_in):
        b, t = np.asarray(dec_in).shape
        logits = np.zeros((b, t, len(self.vocab)))
        for i, row in enumerate(np.asarray(dec_in).tolist()):
            gold = self._lookup[tuple(row)]
            for j, tok in enumerate(gold):
                logits[i, j, tok] = 60.0
        return ag.Tensor(logits)


def test_uniform_predictor_ppl_equals_vocab_size(vocab, dialogues):
    ppl = perplexity(UniformModel(vocab), dialogues)
    assert abs(ppl - len(vocab)) < 1e-6


def test_oracle_predictor_ppl_is_one(vocab, dialogues):
    ppl = perplexity(OracleModel(vocab, dialogues), dialogues)
    assert abs(ppl - 1.0) < 1e-6


def test_perplexity_at_least_one(vocab, dialogues):
    model = Seq2SeqModel(vocab, rng=np.random.default_rng(0))
    assert perplexity(model, dialogues[:10]) >= 1.0


def test_perplexity_empty_corpus_rejected(vocab):
    with pytest.raises(DataError):
        perplexity(UniformModel(vocab), [])


def test_unigram_baseline_reasonable(vocab, dialogues):
    base = unigram_perplexity(dialogues[:30], dialogues[30:], vocab)
    assert 1.0 < base < len(vocab)


def test_untrained_decode_rejected(vocab):
    model = Seq2SeqModel(vocab, rng=np.random.default_rng(0))
    with pytest.raises(ModelError):
        model.greedy_decode(np.zeros((1, 8), dtype=int))


def test_greedy_decode_bounded_and_deterministic(vocab):
    model = Seq2SeqModel(vocab, rng=np.random.default_rng(1))
    model.trained = True
    enc = np.array([vocab.tokenize("make the circle blue", max_len=16)])
    a = model.greedy_decode(enc, max_len=12)[0]
    b = model.greedy_decode(enc, max_len=12)[0]
    assert a == b
    assert len(a.split()) <= 12


def test_examples_one_per_system_turn(vocab, dialogues):
    enc, dec_in, dec_out = dialogue_examples(dialogues, vocab)
    n_system = sum(sum(1 for t in d.turns if t.speaker == "system") for d in dialogues)
    assert len(enc) == len(dec_in) == len(dec_out) == n_system
    assert enc.shape[1] == 96 and dec_in.shape[1] == MAX_TGT
