"""Joint text/image embedding model.

Image side: three strided convs, global mean pool, linear head to d=64.
Text side: embedding table, masked mean pool, linear head. Both sides are
L2-normalized on output; the pre-normalization image features double as the
metric feature space for FID/PRD.
"""
import numpy as np

from chatbrush import ModelError
from chatbrush.nn import autograd as ag
from chatbrush.nn.layers import Conv2d, Embedding, Linear, Module

from .vocab import NULL, NULL_TEXT, PAD, Vocab

EMBED_DIM = 64
ARCH_TAG = "embed-conv3-v1"


def l2_normalize(t, eps=1e-12):
    sq = ag.tensor_sum(ag.power(t, 2.0), axis=-1, keepdims=True)
    return ag.mul(t, ag.power(ag.add(sq, eps), -0.5))


class ImageEncoder(Module):
    def __init__(self, rng, dtype=np.float32):
        self.c1 = Conv2d(3, 32, 3, rng, stride=2, dtype=dtype)
        self.c2 = Conv2d(32, 64, 3, rng, stride=2, dtype=dtype)
        self.c3 = Conv2d(64, 128, 3, rng, stride=2, dtype=dtype)
        self.head = Linear(128, EMBED_DIM, rng, dtype=dtype)

    def forward(self, x):
        h = ag.silu(self.c1(x))
        h = ag.silu(self.c2(h))
        h = ag.silu(self.c3(h))
        pooled = ag.tensor_mean(h, axis=(2, 3))
        return self.head(pooled)


class TextEncoder(Module):
    def __init__(self, vocab_size, rng, dtype=np.float32):
        self.table = Embedding(vocab_size, EMBED_DIM, rng, dtype=dtype)
        self.head = Linear(EMBED_DIM, EMBED_DIM, rng, dtype=dtype)

    def forward(self, ids):
        ids = np.asarray(ids)
        emb = self.table(ids)
        mask = (ids != PAD).astype(emb.dtype)[..., None]
        summed = ag.tensor_sum(ag.mul(emb, mask), axis=1)
        count = np.maximum(mask.sum(axis=1), 1.0)
        return self.head(ag.mul(summed, 1.0 / count))


class EmbedModel(Module):
    def __init__(self, vocab=None, rng=None, dtype=np.float32):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.vocab = vocab or Vocab()
        self.image_enc = ImageEncoder(rng, dtype=dtype)
        self.text_enc = TextEncoder(len(self.vocab), rng, dtype=dtype)
        # learnable inverse temperature, init 1/0.07
        self.log_scale = ag.Tensor(np.array([np.log(1.0 / 0.07)], dtype=dtype),
                                   requires_grad=True)
        self.trained = False

    def _check_trained(self):
        if not self.trained:
            raise ModelError("embedding model is untrained; run train-embed first")

    @staticmethod
    def to_nchw(images):
        arr = np.asarray(images, dtype=np.float32)
        if arr.ndim == 3:
            arr = arr[None]
        return np.ascontiguousarray(arr.transpose(0, 3, 1, 2))

    def image_feature_tensor(self, images_nchw):
        return self.image_enc(ag.Tensor(images_nchw))

    def text_embed_tensor(self, ids):
        return l2_normalize(self.text_enc(ids))

    def image_features(self, images):
        """Pre-normalization pooled features, (N, 64); the FID/PRD space."""
        self._check_trained()
        with ag.no_grad():
            return self.image_feature_tensor(self.to_nchw(images)).data.copy()

    def embed_image(self, images):
        self._check_trained()
        with ag.no_grad():
            feats = self.image_feature_tensor(self.to_nchw(images))
            return l2_normalize(feats).data.copy()

    def embed_text(self, texts):
        """Unit-norm text embeddings; the NULL_TEXT sentinel selects the
        learned null row."""
        self._check_trained()
        single = isinstance(texts, str)
        texts = [texts] if single else list(texts)
        out = np.empty((len(texts), EMBED_DIM), dtype=np.float32)
        plain = [(i, t) for i, t in enumerate(texts) if t != NULL_TEXT]
        with ag.no_grad():
            for i, t in enumerate(texts):
                if t == NULL_TEXT:
                    out[i] = self.null_embedding()
            if plain:
                ids = np.array([self.vocab.tokenize(t) for _, t in plain])
                embs = self.text_embed_tensor(ids).data
                for (i, _), e in zip(plain, embs):
                    out[i] = e
        return out[0] if single else out

    def null_embedding(self):
        """Learned null-condition vector: the reserved row through the head."""
        with ag.no_grad():
            row = self.text_enc.table.table.data[NULL][None, :]
            h = ag.add(ag.matmul(ag.Tensor(row), self.text_enc.head.w),
                       self.text_enc.head.b)
            return l2_normalize(h).data[0].copy()

    def scale(self):
        return float(np.exp(self.log_scale.data[0]))
