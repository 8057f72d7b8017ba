"""Measured behaviors of the trained models (shared acceptance artifacts)."""
import os

import numpy as np
import pytest

from chatbrush.diffusion import (DropoutConfig, GuidanceConfig, new_stack,
                                 training_step)
from chatbrush.embed import directional_similarity
from chatbrush.imaging import load_png
from chatbrush.scenes import caption, render, sample_scene
from chatbrush.synth import (filter_pairs, load_dialogues, load_manifest,
                             load_pairs, score_pair, tau_for_precision)

from conftest import CKPT_DIR, DATA_DIR


@pytest.fixture(scope="module")
def held_out_pairs(acceptance_artifacts):
    manifest = load_manifest(DATA_DIR)
    pairs = load_pairs(DATA_DIR)
    lo, hi = manifest["splits"]["pairs"]["val"]
    return pairs[lo:hi]


def test_retrieval_beats_chance_10x(trained_embedder):
    scenes = [sample_scene([901, i]) for i in range(256)]
    caps = [caption(s) for s in scenes]
    assert len(set(caps)) == 256
    imgs = np.stack([render(s, 64) for s in scenes])
    ei = trained_embedder.embed_image(imgs)
    et = trained_embedder.embed_text(caps)
    acc = float((np.argmax(ei @ et.T, axis=1) == np.arange(256)).mean())
    assert acc > 10.0 / 256, f"retrieval accuracy {acc:.3f}"


def test_matched_cosine_beats_mismatched(trained_embedder):
    scenes = [sample_scene([902, i]) for i in range(128)]
    imgs = np.stack([render(s, 64) for s in scenes])
    caps = [caption(s) for s in scenes]
    ei = trained_embedder.embed_image(imgs)
    et = trained_embedder.embed_text(caps)
    sim = ei @ et.T
    matched = np.diag(sim).mean()
    mismatched = (sim.sum() - np.trace(sim)) / (sim.size - len(sim))
    assert matched > mismatched


def test_position_probe_accuracy(trained_embedder):
    from sklearn.linear_model import LogisticRegression
    from chatbrush.scenes import POSITIONS, ObjectSpec, SceneSpec
    feats, labels = [], []
    rng = np.random.default_rng(0)
    for i in range(720):
        pos = POSITIONS[i % 9]
        scene = sample_scene([903, i])
        obj = scene.objects[0]
        single = SceneSpec(scene.background, "plain",
                           (ObjectSpec(obj.shape, obj.color, obj.size, pos),))
        feats.append(trained_embedder.image_features(render(single, 64)[None])[0])
        labels.append(i % 9)
    feats, labels = np.array(feats), np.array(labels)
    idx = rng.permutation(len(feats))
    train, test = idx[:576], idx[576:]
    probe = LogisticRegression(max_iter=2000).fit(feats[train], labels[train])
    acc = probe.score(feats[test], labels[test])
    assert acc > 0.80, f"position probe accuracy {acc:.3f}"


def test_matched_pair_scores_beat_mismatched(trained_embedder, held_out_pairs):
    pairs = held_out_pairs[:80]
    matched, mismatched = [], []
    for i, p in enumerate(pairs):
        orig = load_png(os.path.join(DATA_DIR, p.original_image))
        edit = load_png(os.path.join(DATA_DIR, p.edited_image))
        matched.append(directional_similarity(trained_embedder, orig, edit,
                                              p.caption, p.edited_caption))
        q = pairs[(i + 7) % len(pairs)]  # wrong instruction's caption pair
        mismatched.append(directional_similarity(trained_embedder, orig, edit,
                                                 q.caption, q.edited_caption))
    assert np.mean(matched) > np.mean(mismatched)
    assert np.mean(matched) > 0


def test_filter_threshold_calibration_and_monotonicity(trained_embedder, held_out_pairs):
    pairs = held_out_pairs[:60]
    pos_scores, neg_scores = [], []
    for i, p in enumerate(pairs):
        pos_scores.append(score_pair(trained_embedder, p, DATA_DIR))
        import copy
        q = copy.copy(p)
        other = pairs[(i + 11) % len(pairs)]
        q.caption, q.edited_caption = other.caption, other.edited_caption
        neg_scores.append(score_pair(trained_embedder, q, DATA_DIR))
    tau = tau_for_precision(pos_scores, neg_scores, precision=0.95)
    kept_pos = sum(s >= tau for s in pos_scores)
    kept_neg = sum(s >= tau for s in neg_scores)
    assert kept_pos / max(kept_pos + kept_neg, 1) >= 0.95
    assert kept_pos > 0

    kept_all, _ = filter_pairs(list(pairs), trained_embedder, -1.0, DATA_DIR)
    kept_tau, _ = filter_pairs(list(pairs), trained_embedder, tau, DATA_DIR)
    kept_hi, _ = filter_pairs(list(pairs), trained_embedder, min(1.0, tau + 0.2),
                              DATA_DIR)
    assert len(kept_all) >= len(kept_tau) >= len(kept_hi)
    assert len(kept_all) == len(pairs)  # every real edit has a nonzero direction


def test_filter_drops_zero_direction_pair(trained_embedder, held_out_pairs, tmp_path):
    import copy
    p = copy.copy(held_out_pairs[0])
    p.edited_image = p.original_image  # identical images: undefined direction
    kept, dropped = filter_pairs([p], trained_embedder, -1.0, DATA_DIR)
    assert not kept and dropped == [p]
    assert p.filter_score == -1.0


def test_trained_loss_beats_init_on_held_out(trained_stack, held_out_pairs):
    from chatbrush.diffusion import PairDataset
    ds = PairDataset(held_out_pairs[:64], DATA_DIR, trained_stack)
    batch = ds.batch(np.arange(64))
    rng_seed = 424242
    loss_trained, _ = training_step(trained_stack, batch, DropoutConfig(0, 0, 0),
                                    np.random.default_rng(rng_seed))
    fresh = new_stack(trained_stack.embedder, base=16, seed=1)
    loss_init, _ = training_step(fresh, batch, DropoutConfig(0, 0, 0),
                                 np.random.default_rng(rng_seed))
    assert loss_trained < 0.5 * loss_init, (loss_trained, loss_init)


def test_text_scale_sweep_improves_alignment(trained_stack, held_out_pairs):
    """Mean directional similarity does not degrade from s_T=0 to the default."""
    from chatbrush.evals import generate_edits
    pairs = held_out_pairs[:24]
    sims = []
    for s_text in (0.0, 7.5):
        gcfg = GuidanceConfig(s_img=1.5, s_text=s_text, steps=20, seed=77)
        inputs, _, generated = generate_edits(trained_stack, pairs, DATA_DIR, gcfg,
                                              batch_size=24)
        vals = []
        from chatbrush.embed import ZeroDirectionError
        for i, p in enumerate(pairs):
            try:
                vals.append(directional_similarity(trained_stack.embedder, inputs[i],
                                                   generated[i], p.caption,
                                                   p.edited_caption))
            except ZeroDirectionError:
                vals.append(0.0)
        sims.append(float(np.mean(vals)))
    assert sims[1] >= sims[0], f"dirsim fell from {sims[0]:.3f} to {sims[1]:.3f}"


def test_generated_replies_parse_as_confirmations(acceptance_artifacts):
    from chatbrush.dialogue import (DIRECT, DialogueState, detect_ambiguity,
                                    generate_reply, load_dialogue_checkpoint)
    model, _ = load_dialogue_checkpoint(os.path.join(CKPT_DIR, "dialogue.npz"))
    dialogues = load_dialogues(DATA_DIR)
    manifest = load_manifest(DATA_DIR)
    lo, hi = manifest["splits"]["dialogues"]["test"]
    contexts = [d for d in dialogues[lo:hi] if d.ambiguity_tag == "direct"]
    extra = [d for d in dialogues if d.ambiguity_tag == "direct"]
    contexts = (contexts + extra)[:100]
    valid = 0
    for d in contexts:
        reply = generate_reply(model, d.caption, d.turns[:1])
        assert len(reply.split()) <= 32
        if reply.startswith("okay") and detect_ambiguity(
                reply.replace("okay, i will", "").strip(" ."),
                DialogueState()).kind == DIRECT:
            valid += 1
    assert valid >= 70, f"{valid}/100 replies parsed as valid confirmations"
