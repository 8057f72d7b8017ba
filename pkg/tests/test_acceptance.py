"""Release acceptance suite.

Each test enforces one acceptance criterion at its stated tolerance and
prints one [ACCEPT] line on success. The trained artifacts build once via
the CLI (see conftest.py) and are reused across runs.
"""
import json
import os
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from chatbrush.diffusion import (DropoutConfig, GuidanceConfig, LatentCodec,
                                 NoiseSchedule, forward_diffuse, guided_noise,
                                 new_stack, training_step)
from chatbrush.diffusion.editor import EditorStack
from chatbrush.diffusion.unet import CondUNet
from chatbrush.embed import EmbedModel
from chatbrush.evals import fid, prd
from chatbrush.imaging import load_png
from chatbrush.scenes import render, sample_scene
from chatbrush.synth import load_dialogues, load_manifest, load_pairs
from chatbrush.synth.generate import replay_dialogue

from conftest import CKPT_DIR, DATA_DIR
from util import central_diff

SEED = 20250811


def ok(line):
    print(f"\n[ACCEPT] {line}: PASS")


# --- criterion: dual-scale guidance algebra --------------------------------

def test_guidance_algebra_identities():
    t0 = time.time()
    emb = EmbedModel(rng=np.random.default_rng(SEED))
    emb.trained = True
    stack = new_stack(emb, base=8, seed=SEED + 1)
    rng = np.random.default_rng(SEED + 2)
    worst_unit, worst_zero = 0.0, 0.0
    for chunk in range(10):  # 10 batches x 10 inputs = 100 random inputs
        b = 10
        z = rng.standard_normal((b, 3, 64, 64)).astype(np.float32)
        ci = rng.standard_normal((b, 3, 64, 64)).astype(np.float32)
        ct = rng.standard_normal((b, 64)).astype(np.float32)
        t = rng.integers(1, stack.schedule.T + 1, size=b)
        null_rows = np.broadcast_to(stack.null_text_embedding, ct.shape).astype(np.float32)
        full = stack.unet.predict(z, t, ci, ct)
        uncond = stack.unet.predict(z, t, np.zeros_like(ci), null_rows)
        g11 = guided_noise(stack.unet, z, t, ci, ct, 1.0, 1.0, stack.null_text_embedding)
        g00 = guided_noise(stack.unet, z, t, ci, ct, 0.0, 0.0, stack.null_text_embedding)
        worst_unit = max(worst_unit, float(np.abs(g11 - full).max()))
        worst_zero = max(worst_zero, float(np.abs(g00 - uncond).max()))
    elapsed = time.time() - t0
    assert worst_unit < 1e-6, worst_unit
    assert worst_zero < 1e-6, worst_zero
    assert elapsed < 60, f"runtime {elapsed:.1f}s exceeds 1 min budget"
    ok(f"guidance algebra (unit {worst_unit:.1e}, zero {worst_zero:.1e}, {elapsed:.0f}s)")


# --- criterion: forward-process Monte-Carlo marginals ----------------------

def test_forward_process_monte_carlo():
    t0 = time.time()
    schedule = NoiseSchedule.linear()
    rng = np.random.default_rng(SEED)
    z0 = rng.normal(size=(4, 3)).astype(np.float64)
    n = 10_000
    for t in (1, schedule.T // 2, schedule.T):
        eps = rng.standard_normal((n,) + z0.shape)
        zt = forward_diffuse(np.broadcast_to(z0, (n,) + z0.shape).copy(),
                             np.full(n, t), eps, schedule)
        ab = schedule.alpha_bar(t)
        mean_se = np.sqrt((1 - ab) / n)
        var_se = (1 - ab) * np.sqrt(2.0 / (n - 1))
        assert np.all(np.abs(zt.mean(axis=0) - np.sqrt(ab) * z0) <= 3 * mean_se + 1e-12), t
        assert np.all(np.abs(zt.var(axis=0) - (1 - ab)) <= 3 * var_se + 1e-12), t
    elapsed = time.time() - t0
    assert elapsed < 60, f"runtime {elapsed:.1f}s exceeds 1 min budget"
    ok(f"forward-process marginals at t=1, T/2, T ({elapsed:.0f}s)")


# --- criterion: training-step gradient check -------------------------------

def test_training_step_gradient_check():
    emb = EmbedModel(rng=np.random.default_rng(SEED))
    emb.trained = True
    unet = CondUNet(latent_channels=3, base=8, rng=np.random.default_rng(SEED + 3),
                    dtype=np.float64)
    stack = EditorStack(unet=unet, schedule=NoiseSchedule.linear(),
                        codec=LatentCodec("identity"), embedder=emb)
    rng_data = np.random.default_rng(SEED + 4)
    batch = {"input_latent": rng_data.standard_normal((2, 3, 16, 16)),
             "edited_latent": rng_data.standard_normal((2, 3, 16, 16)),
             "text_emb": rng_data.standard_normal((2, 64))}
    dropout = DropoutConfig(0.3, 0.2, 0.2)  # exercise the null branches too

    def loss_value():
        loss, _ = training_step(stack, batch, dropout, np.random.default_rng(99))
        return loss

    loss_t, _ = training_step(stack, batch, dropout, np.random.default_rng(99),
                              return_tensor=True)
    params = unet.parameters()
    for p in params.values():
        p.grad = None
    loss_t.backward()

    probe_rng = np.random.default_rng(SEED + 5)
    names = sorted(params)
    checked, failures = 0, []
    i = 0
    while checked < 24 and i < 400:
        name = names[i % len(names)]
        i += 1
        p = params[name]
        if p.grad is None:
            continue
        idx = np.unravel_index(int(probe_rng.integers(p.data.size)), p.data.shape)
        g = float(p.grad[idx])
        fd = central_diff(loss_value, p.data, idx, 1e-5)
        denom = max(abs(g), abs(fd))
        if denom < 1e-7:  # too small for a meaningful relative comparison
            continue
        rel = abs(g - fd) / denom
        checked += 1
        if rel >= 1e-3:
            failures.append((name, idx, g, fd, rel))
    assert checked >= 20, f"only {checked} usable probes"
    assert not failures, failures
    ok(f"gradient check: {checked} probes, all rel err < 1e-3")


# --- criterion: metric oracles ---------------------------------------------

def test_metric_oracles():
    rng = np.random.default_rng(SEED)
    a = rng.normal(size=(150, 64))
    assert fid(a, a) <= 1e-6
    assert abs(fid(np.zeros((8, 1)), np.ones((8, 1))) - 1.0) < 1e-12
    assert abs(prd(a, a.copy())["max_f1"] - 1.0) <= 1e-6

    from chatbrush.dialogue import perplexity
    from chatbrush.embed.vocab import build_dialogue_vocab
    from chatbrush.nn import autograd as ag
    from chatbrush.synth.datasets import make_dialogue

    vocab = build_dialogue_vocab()

    class Uniform:
        def __init__(self):
            self.vocab = vocab
        def forward_logits(self, enc, dec_in):
            b, t = np.asarray(dec_in).shape
            return ag.Tensor(np.zeros((b, t, len(vocab))))

    dialogues = [make_dialogue(i, seed=SEED) for i in range(10)]
    ppl = perplexity(Uniform(), dialogues)
    assert abs(ppl - len(vocab)) < 1e-6
    ok(f"metric oracles (FID id/delta, PRD id, uniform ppl = |V| = {len(vocab)})")


# --- criterion: dialogue correctness + bit-exact forget --------------------

def test_dialogue_replay_recovers_all_edits(acceptance_artifacts):
    dialogues = load_dialogues(DATA_DIR)
    assert len(dialogues) >= 1000
    exact = 0
    for d in dialogues:
        final, _ = replay_dialogue(d)
        if final == d.resolved_instruction:
            exact += 1
    assert exact == len(dialogues), f"{exact}/{len(dialogues)} replays exact"
    ok(f"dialogue replay: {exact}/{len(dialogues)} edits recovered exactly")


def test_forget_bit_exact_over_500_traces(tmp_path_factory):
    from chatbrush.service import create_app
    emb = EmbedModel(rng=np.random.default_rng(SEED))
    emb.trained = True
    stack = new_stack(emb, base=8, seed=SEED + 6)
    stack.trained = True
    root = tmp_path_factory.mktemp("traces")
    app = create_app(stack, str(root), default_guidance=GuidanceConfig(steps=1, seed=1))
    instructions = ["make the background blue", "apply the sepia style",
                    "make the background green", "apply the night style",
                    "make the background red"]
    from chatbrush.imaging import to_png_bytes
    rng = np.random.default_rng(SEED + 7)
    failures = 0
    with TestClient(app) as client:
        for trace in range(500):
            png = to_png_bytes(render(sample_scene(int(rng.integers(10_000))), 64))
            view = client.post("/sessions",
                               files={"file": ("s.png", png, "image/png")}).json()
            sid = view["id"]
            bytes_at = [client.get(f"/images/{view['image_stack'][0]}.png").content]
            k = int(rng.integers(1, 4))
            for e in range(k):
                text = instructions[int(rng.integers(len(instructions)))]
                body = client.post(f"/sessions/{sid}/messages", json={"text": text}).json()
                assert body["kind"] == "edited", body
                bytes_at.append(client.get(f"/images/{body['image']}.png").content)
            pops = int(rng.integers(1, k + 1))
            for p in range(pops):
                body = client.post(f"/sessions/{sid}/messages",
                                   json={"text": "forget that"}).json()
                assert body["kind"] == "forget_ack", body
                restored = client.get(f"/images/{body['image']}.png").content
                if restored != bytes_at[k - 1 - p]:
                    failures += 1
    assert failures == 0, f"{failures} traces restored wrong bytes"
    ok("forget restored byte-identical images in 500/500 session traces")


# --- criterion: desk-scale editing regression ------------------------------

def test_editing_regression(trained_stack):
    from chatbrush.evals import edit_quality_report, generate_edits
    manifest = load_manifest(DATA_DIR)
    pairs = load_pairs(DATA_DIR)
    lo, hi = manifest["splits"]["pairs"]["test"]
    test_pairs = pairs[lo:hi][:200]
    assert len(test_pairs) == 200
    n_train = manifest["splits"]["pairs"]["train"][1]
    assert n_train >= 5000
    assert {p.edit.kind for p in test_pairs} <= {"recolor", "replace_shape"}

    gcfg = GuidanceConfig(s_img=1.5, s_text=7.5, steps=20, seed=SEED)
    inputs, truths, generated = generate_edits(trained_stack, test_pairs, DATA_DIR,
                                               gcfg, batch_size=25)
    report = edit_quality_report(test_pairs, inputs, truths, generated,
                                 trained_stack.embedder)

    untrained = new_stack(trained_stack.embedder, base=16, seed=SEED + 9)
    untrained.trained = True
    _, _, generated_u = generate_edits(untrained, test_pairs, DATA_DIR, gcfg,
                                       batch_size=25)
    report_u = edit_quality_report(test_pairs, inputs, truths, generated_u,
                                   trained_stack.embedder)

    frac = report["fraction_closer_to_truth"]
    assert frac >= 0.80, f"only {frac:.1%} of edits closer to truth than to input"
    assert report["mean_directional_similarity"] > report_u["mean_directional_similarity"]
    ok(f"editing regression: {frac:.1%} closer to truth; dirsim "
       f"{report['mean_directional_similarity']:.3f} > untrained "
       f"{report_u['mean_directional_similarity']:.3f}")


# --- criterion: seq2seq perplexity vs unigram baseline ---------------------

def test_seq2seq_perplexity_halves_unigram(acceptance_artifacts):
    from chatbrush.dialogue import (load_dialogue_checkpoint, perplexity,
                                    unigram_perplexity)
    model, meta = load_dialogue_checkpoint(os.path.join(CKPT_DIR, "dialogue.npz"))
    dialogues = load_dialogues(DATA_DIR)
    manifest = load_manifest(DATA_DIR)
    sp = manifest["splits"]["dialogues"]
    train_d = dialogues[sp["train"][0]:sp["train"][1]]
    test_d = dialogues[sp["test"][0]:sp["test"][1]]
    ppl = perplexity(model, test_d)
    baseline = unigram_perplexity(train_d, test_d, model.vocab)
    assert ppl >= 1.0
    assert ppl < 0.5 * baseline, f"ppl {ppl:.3f} vs unigram {baseline:.3f}"
    ok(f"seq2seq held-out ppl {ppl:.3f} < 0.5 x unigram {baseline:.3f}")


# --- criterion: CLI determinism --------------------------------------------

def _tree_digest(root):
    import hashlib
    h = hashlib.sha256()
    for dirpath, dirnames, filenames in sorted(os.walk(root)):
        dirnames.sort()
        for name in sorted(filenames):
            p = os.path.join(dirpath, name)
            h.update(os.path.relpath(p, root).encode())
            with open(p, "rb") as f:
                h.update(f.read())
    return h.hexdigest()


def test_cli_determinism(acceptance_artifacts, tmp_path):
    from chatbrush.cli import entry
    from chatbrush.imaging import save_png

    a, b = str(tmp_path / "sa"), str(tmp_path / "sb")
    assert entry(["synth-data", "--n-dialogues", "20", "--n-pairs", "25",
                  "--seed", "5", "--out", a]) == 0
    assert entry(["synth-data", "--n-dialogues", "20", "--n-pairs", "25",
                  "--seed", "5", "--out", b]) == 0
    assert _tree_digest(a) == _tree_digest(b)

    img = tmp_path / "input.png"
    save_png(str(img), render(sample_scene(4), 64))
    outs = []
    for name in ("e1.png", "e2.png"):
        out = tmp_path / name
        code = entry(["edit", "--image", str(img), "--instruction",
                      "make the circle blue", "--out", str(out),
                      "--checkpoint-dir", CKPT_DIR, "--seed", "9", "--steps", "10"])
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]

    reports = []
    for name in ("r1.json", "r2.json"):
        out = tmp_path / name
        code = entry(["eval", "--checkpoint-dir", CKPT_DIR, "--data", DATA_DIR,
                      "--out", str(out), "--n-pairs", "24", "--seed", "3"])
        assert code == 0
        reports.append(out.read_bytes())
    assert reports[0] == reports[1]
    json.loads(reports[0])  # valid JSON report
    ok("synth-data / edit / eval byte-identical across reruns")
