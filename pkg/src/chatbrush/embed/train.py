"""Contrastive training: symmetric InfoNCE over in-batch negatives."""
import numpy as np

from chatbrush import DataError
from chatbrush.nn import autograd as ag
from chatbrush.nn.optim import Adam
from chatbrush.nn.serialize import load_checkpoint, save_checkpoint

from .model import ARCH_TAG, EmbedModel, l2_normalize


def info_nce_loss(model, images_nchw, token_ids):
    """Mean of image->text and text->image cross entropies."""
    n = images_nchw.shape[0]
    img = l2_normalize(model.image_feature_tensor(images_nchw))
    txt = model.text_embed_tensor(token_ids)
    scale = ag.exp(model.log_scale)
    logits = ag.mul(ag.matmul(img, ag.transpose(txt, (1, 0))), scale)
    targets = np.arange(n)
    loss_i = ag.tensor_mean(ag.nll_per_row(logits, targets))
    loss_t = ag.tensor_mean(ag.nll_per_row(ag.transpose(logits, (1, 0)), targets))
    return ag.mul(ag.add(loss_i, loss_t), 0.5)


def contrastive_step(model, images, captions, optimizer):
    if len(set(captions)) <= 1 and len(captions) > 1:
        raise DataError("degenerate batch: all captions identical")
    images_nchw = EmbedModel.to_nchw(images)
    ids = np.array([model.vocab.tokenize(c) for c in captions])
    loss = info_nce_loss(model, images_nchw, ids)
    optimizer.zero_grad()
    loss.backward()
    optimizer.step()
    return float(loss.data)


def train_contrastive(pairs, config=None, model=None, log=None):
    """Train on (image, caption) pairs.

    config keys (all optional): epochs, batch_size, lr, seed.
    Returns (model, report). The report carries the per-epoch loss history.
    """
    cfg = {"epochs": 8, "batch_size": 128, "lr": 1e-3, "seed": 0}
    cfg.update(config or {})
    if len(pairs) < 2:
        raise DataError("need at least one batch of distinct pairs")
    rng = np.random.default_rng(cfg["seed"])
    model = model or EmbedModel(rng=np.random.default_rng(cfg["seed"] + 1))
    opt = Adam(model.parameters(), lr=cfg["lr"])
    bs = min(cfg["batch_size"], len(pairs))
    history = []
    for epoch in range(cfg["epochs"]):
        order = rng.permutation(len(pairs))
        losses = []
        for start in range(0, len(pairs) - bs + 1, bs):
            batch = [pairs[i] for i in order[start:start + bs]]
            images = np.stack([b[0] for b in batch])
            captions = [b[1] for b in batch]
            losses.append(contrastive_step(model, images, captions, opt))
        history.append(float(np.mean(losses)))
        if log:
            log(f"epoch {epoch + 1}/{cfg['epochs']} loss {history[-1]:.4f}")
    model.trained = True
    report = {"loss_history": history, "config": cfg, "n_pairs": len(pairs),
              "vocab_hash": model.vocab.content_hash()}
    return model, report


def save_embed_checkpoint(path, model, report=None):
    meta = {
        "arch": ARCH_TAG,
        "vocab_hash": model.vocab.content_hash(),
        "dim": 64,
        "trained": model.trained,
        "report": report or {},
    }
    save_checkpoint(path, model.state_arrays(), meta)


def load_embed_checkpoint(path):
    meta, arrays = load_checkpoint(path, expect_arch=ARCH_TAG)
    model = EmbedModel()
    if meta["vocab_hash"] != model.vocab.content_hash():
        raise DataError("checkpoint vocabulary does not match this build")
    model.load_state(arrays)
    model.trained = bool(meta.get("trained"))
    return model, meta
