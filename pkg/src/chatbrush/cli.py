"""Single CLI entrypoint binding all pipelines.

Exit codes: 0 ok, 1 usage error, 2 data error, 3 model error.
"""
import json
import os
import sys

import click
import numpy as np

from chatbrush import DataError, ModelError
from chatbrush.config import RunConfig


@click.group()
def cli():
    """Dialogue-driven image editing on procedural scenes."""


def _echo(msg):
    click.echo(msg)


def _load_embedder(checkpoint_dir):
    from chatbrush.embed import load_embed_checkpoint
    path = os.path.join(checkpoint_dir, "embed.npz")
    if not os.path.exists(path):
        raise ModelError(f"missing embedding checkpoint: {path}")
    model, _ = load_embed_checkpoint(path)
    return model


def _load_stack(checkpoint_dir):
    from chatbrush.diffusion import load_codec, load_stack
    embedder = _load_embedder(checkpoint_dir)
    path = os.path.join(checkpoint_dir, "diffusion.npz")
    if not os.path.exists(path):
        raise ModelError(f"missing diffusion checkpoint: {path}")
    codec_path = os.path.join(checkpoint_dir, "codec.npz")
    codec = load_codec(codec_path) if os.path.exists(codec_path) else None
    stack, meta = load_stack(path, embedder, codec=codec)
    return stack, meta


def _guidance(cfg, s_img, s_text, steps, eta, seed, strength=None):
    from chatbrush.diffusion import GuidanceConfig
    g = GuidanceConfig(
        s_img=s_img if s_img is not None else cfg.get("guidance", "s_img"),
        s_text=s_text if s_text is not None else cfg.get("guidance", "s_text"),
        steps=steps if steps is not None else cfg.get("guidance", "steps"),
        eta=eta if eta is not None else cfg.get("guidance", "eta"),
        seed=seed,
        strength=strength if strength is not None else cfg.get("guidance", "strength"),
    )
    g.validate()
    return g


@cli.command("synth-data")
@click.option("--n-dialogues", type=int, default=None)
@click.option("--n-pairs", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--resolution", type=int, default=None)
@click.option("--pair-kinds", type=str, default=None,
              help="comma-separated edit kinds for the pair corpus")
@click.option("--config", "config_path", type=click.Path(), default=None)
def synth_data(n_dialogues, n_pairs, seed, out, resolution, pair_kinds, config_path):
    """Generate the synthetic dialogue + edit-pair corpus."""
    from chatbrush.synth import build_datasets
    cfg = RunConfig.load(config_path)
    cfg.override("data", "n_dialogues", n_dialogues)
    cfg.override("data", "n_pairs", n_pairs)
    cfg.override("data", "resolution", resolution)
    cfg.override("data", "pair_kinds", pair_kinds)
    manifest = build_datasets(
        n_dialogues=cfg.get("data", "n_dialogues"),
        n_pairs=cfg.get("data", "n_pairs"),
        seed=seed,
        out_dir=out,
        resolution=cfg.get("data", "resolution"),
        pair_kinds=cfg.pair_kinds(),
        log=_echo,
    )
    manifest["config"] = cfg.resolved()
    with open(os.path.join(out, "manifest.json"), "w") as f:
        f.write(json.dumps(manifest, sort_keys=True, separators=(",", ":")) + "\n")
    _echo(f"wrote {manifest['counts']['pairs']} pairs, "
          f"{manifest['counts']['dialogues']} dialogues to {out}")


@cli.command("train-embed")
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--epochs", type=int, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(), default=None)
def train_embed(data, out, epochs, batch_size, seed, config_path):
    """Train the contrastive text/image embedder."""
    from chatbrush.embed import save_embed_checkpoint, train_contrastive
    from chatbrush.imaging import load_png
    from chatbrush.synth import load_manifest, load_pairs
    cfg = RunConfig.load(config_path)
    cfg.override("embed", "epochs", epochs)
    cfg.override("embed", "batch_size", batch_size)
    pairs = load_pairs(data)
    manifest = load_manifest(data)
    lo, hi = manifest["splits"]["pairs"]["train"]
    samples = []
    for p in pairs[lo:hi]:
        samples.append((load_png(os.path.join(data, p.original_image)), p.caption))
        edited = load_png(os.path.join(data, p.edited_image))
        samples.append((edited, p.edited_caption))
        samples.append((edited, p.instruction))  # grounds instruction wording
    model, report = train_contrastive(
        samples,
        {"epochs": cfg.get("embed", "epochs"),
         "batch_size": cfg.get("embed", "batch_size"),
         "lr": cfg.get("embed", "lr"), "seed": seed},
        log=_echo,
    )
    report["resolved_config"] = cfg.resolved()
    os.makedirs(out, exist_ok=True)
    save_embed_checkpoint(os.path.join(out, "embed.npz"), model, report)
    with open(os.path.join(out, "embed_report.json"), "w") as f:
        json.dump(report, f, sort_keys=True, indent=1)
    _echo(f"final loss {report['loss_history'][-1]:.4f}; saved to {out}/embed.npz")


@cli.command("train-diffusion")
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--embed", "embed_dir", required=True, type=click.Path(exists=True),
              help="directory holding embed.npz")
@click.option("--out", required=True, type=click.Path())
@click.option("--steps", type=int, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--base", "base_channels", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--resume", type=click.Path(exists=True), default=None,
              help="train_state.npz to resume from")
@click.option("--config", "config_path", type=click.Path(), default=None)
def train_diffusion(data, embed_dir, out, steps, batch_size, base_channels, seed,
                    resume, config_path):
    """Train the conditional diffusion editor."""
    from chatbrush.diffusion import (DropoutConfig, PairDataset, TrainConfig,
                                     new_stack, train)
    from chatbrush.synth import load_manifest, load_pairs
    cfg = RunConfig.load(config_path)
    cfg.override("diffusion", "steps", steps)
    cfg.override("diffusion", "batch_size", batch_size)
    cfg.override("diffusion", "base_channels", base_channels)
    embedder = _load_embedder(embed_dir)
    stack = new_stack(embedder, base=cfg.get("diffusion", "base_channels"), seed=seed)
    pairs = load_pairs(data)
    manifest = load_manifest(data)
    dataset = PairDataset(pairs, data, stack,
                          split_range=manifest["splits"]["pairs"]["train"])
    tc = TrainConfig(
        steps=cfg.get("diffusion", "steps"),
        batch_size=cfg.get("diffusion", "batch_size"),
        lr=cfg.get("diffusion", "lr"),
        lr_final=cfg.get("diffusion", "lr_final"),
        seed=seed,
        dropout=DropoutConfig(cfg.get("diffusion", "p_text"),
                              cfg.get("diffusion", "p_img"),
                              cfg.get("diffusion", "p_both")),
        ema_decay=cfg.get("diffusion", "ema_decay"),
    )
    report = train(stack, dataset, tc, out, resume_from=resume, log=_echo)
    report["resolved_config"] = cfg.resolved()
    with open(os.path.join(out, "train_report.json"), "w") as f:
        json.dump(report, f, sort_keys=True, indent=1)
    _echo(f"saved diffusion checkpoint to {out}/diffusion.npz")


@cli.command("train-dialogue")
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--epochs", type=int, default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(), default=None)
def train_dialogue(data, out, epochs, seed, config_path):
    """Train the seq2seq dialogue model and report perplexity."""
    from chatbrush.dialogue import (perplexity, save_dialogue_checkpoint,
                                    train_seq2seq, unigram_perplexity)
    from chatbrush.synth import load_dialogues, load_manifest
    cfg = RunConfig.load(config_path)
    cfg.override("dialogue", "epochs", epochs)
    dialogues = load_dialogues(data)
    manifest = load_manifest(data)
    sp = manifest["splits"]["dialogues"]
    train_d = dialogues[sp["train"][0]:sp["train"][1]]
    val_d = dialogues[sp["val"][0]:sp["val"][1]] or dialogues[-10:]
    model, report = train_seq2seq(
        train_d,
        {"epochs": cfg.get("dialogue", "epochs"),
         "batch_size": cfg.get("dialogue", "batch_size"),
         "lr": cfg.get("dialogue", "lr"), "seed": seed},
        log=_echo,
    )
    report["val_ppl"] = perplexity(model, val_d)
    report["val_unigram_ppl"] = unigram_perplexity(train_d, val_d, model.vocab)
    report["resolved_config"] = cfg.resolved()
    os.makedirs(out, exist_ok=True)
    save_dialogue_checkpoint(os.path.join(out, "dialogue.npz"), model, report)
    with open(os.path.join(out, "dialogue_report.json"), "w") as f:
        json.dump(report, f, sort_keys=True, indent=1)
    _echo(f"val ppl {report['val_ppl']:.3f} (unigram {report['val_unigram_ppl']:.3f})")


@cli.command("edit")
@click.option("--image", required=True, type=click.Path(exists=True))
@click.option("--instruction", required=True, type=str)
@click.option("--out", required=True, type=click.Path())
@click.option("--checkpoint-dir", required=True, type=click.Path(exists=True))
@click.option("--s-image", "s_img", type=float, default=None)
@click.option("--s-text", type=float, default=None)
@click.option("--steps", type=int, default=None)
@click.option("--eta", type=float, default=None)
@click.option("--strength", type=float, default=None,
              help="reverse-process start point in (0, 1]; <1 starts from the noised input")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(), default=None)
def edit(image, instruction, out, checkpoint_dir, s_img, s_text, steps, eta,
         strength, seed, config_path):
    """Apply one instruction to one image."""
    from chatbrush.diffusion import ddim_sample
    from chatbrush.imaging import decode_upload, save_png
    cfg = RunConfig.load(config_path)
    stack, meta = _load_stack(checkpoint_dir)
    gcfg = _guidance(cfg, s_img, s_text, steps, eta, seed, strength)
    with open(image, "rb") as f:
        img = decode_upload(f.read(), meta.get("resolution", 64))
    edited = ddim_sample(stack, img, instruction, gcfg)
    save_png(out, edited)
    _echo(f"wrote {out}")


@cli.command("chat")
@click.option("--image", required=True, type=click.Path(exists=True))
@click.option("--checkpoint-dir", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default="chat_session",
              show_default=True, help="directory for edited images")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(), default=None)
def chat(image, checkpoint_dir, out, seed, config_path):
    """Terminal REPL: converse, edit, and forget."""
    from chatbrush.dialogue import DialogueState, respond
    from chatbrush.diffusion import ddim_sample
    from chatbrush.imaging import decode_upload, save_png
    cfg = RunConfig.load(config_path)
    stack, meta = _load_stack(checkpoint_dir)
    gcfg = _guidance(cfg, None, None, None, None, seed)
    with open(image, "rb") as f:
        current = decode_upload(f.read(), meta.get("resolution", 64))
    os.makedirs(out, exist_ok=True)
    stack_imgs = [current]
    state = DialogueState()
    _echo("type an edit instruction (ctrl-d to quit)")
    for line in sys.stdin:
        text = line.strip()
        if not text:
            continue
        turn, state, instr = respond(state, text)
        _echo(f"system: {turn.text}")
        if instr is None:
            continue
        if instr.forget:
            if len(stack_imgs) > 1:
                stack_imgs.pop()
                state.mark_forgotten()
        else:
            stack_imgs.append(ddim_sample(stack, stack_imgs[-1], instr.text, gcfg))
            state.mark_applied()
            path = os.path.join(out, f"edit_{len(stack_imgs) - 1:03d}.png")
            save_png(path, stack_imgs[-1])
            _echo(f"[edited image saved to {path}]")
    return 0


@cli.command("serve")
@click.option("--host", type=str, default=None)
@click.option("--port", type=int, default=None)
@click.option("--checkpoint-dir", required=True, type=click.Path(exists=True))
@click.option("--store", "store_path", type=click.Path(), default=None,
              help="state directory; defaults to $CHATBRUSH_STORE")
@click.option("--config", "config_path", type=click.Path(), default=None)
def serve(host, port, checkpoint_dir, store_path, config_path):
    """Run the HTTP session service."""
    import uvicorn
    from chatbrush.service import create_app, store_root_from_env
    from chatbrush.diffusion import GuidanceConfig
    cfg = RunConfig.load(config_path)
    cfg.override("service", "host", host)
    cfg.override("service", "port", port)
    stack, meta = _load_stack(checkpoint_dir)
    gcfg = GuidanceConfig(s_img=cfg.get("guidance", "s_img"),
                          s_text=cfg.get("guidance", "s_text"),
                          steps=cfg.get("guidance", "steps"))
    app = create_app(stack, store_path or store_root_from_env(),
                     default_guidance=gcfg, resolution=meta.get("resolution", 64))
    uvicorn.run(app, host=cfg.get("service", "host"), port=cfg.get("service", "port"))


@cli.command("eval")
@click.option("--checkpoint-dir", required=True, type=click.Path(exists=True))
@click.option("--data", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
@click.option("--n-pairs", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--config", "config_path", type=click.Path(), default=None)
def eval_cmd(checkpoint_dir, data, out, n_pairs, seed, config_path):
    """Objective metrics on held-out pairs and dialogues."""
    from chatbrush.evals import edit_quality_report, generate_edits, write_report
    from chatbrush.synth import load_manifest, load_pairs
    cfg = RunConfig.load(config_path)
    stack, meta = _load_stack(checkpoint_dir)
    pairs = load_pairs(data)
    manifest = load_manifest(data)
    lo, hi = manifest["splits"]["pairs"]["test"]
    test_pairs = pairs[lo:hi][:n_pairs]
    if not test_pairs:
        raise DataError("no test pairs in the dataset split")
    gcfg = _guidance(cfg, None, None, None, None, seed)
    inputs, truths, generated = generate_edits(stack, test_pairs, data, gcfg)
    report = edit_quality_report(test_pairs, inputs, truths, generated, stack.embedder)
    report["guidance"] = gcfg.to_json()
    report["seed"] = seed
    report["resolved_config"] = cfg.resolved()
    dlg_path = os.path.join(checkpoint_dir, "dialogue.npz")
    if os.path.exists(dlg_path):
        from chatbrush.dialogue import load_dialogue_checkpoint, perplexity, unigram_perplexity
        from chatbrush.synth import load_dialogues
        model, _ = load_dialogue_checkpoint(dlg_path)
        dialogues = load_dialogues(data)
        sp = manifest["splits"]["dialogues"]
        train_d = dialogues[sp["train"][0]:sp["train"][1]]
        test_d = dialogues[sp["test"][0]:sp["test"][1]]
        if test_d:
            report["dialogue_ppl"] = perplexity(model, test_d)
            report["dialogue_unigram_ppl"] = unigram_perplexity(train_d, test_d,
                                                                model.vocab)
    write_report(out, report)
    _echo(f"wrote {out}")


def entry(argv=None):
    try:
        return cli.main(args=argv, standalone_mode=False) or 0
    except click.UsageError as e:
        e.show()
        return 1
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.Abort:
        return 1
    except DataError as e:
        click.echo(f"data error: {e}", err=True)
        return 2
    except ModelError as e:
        click.echo(f"model error: {e}", err=True)
        return 3


if __name__ == "__main__":
    sys.exit(entry())
