"""DDIM sampling with dual-scale guidance."""
import numpy as np

from chatbrush import ModelError

from .guidance import guided_noise


def ddim_timesteps(T, steps):
    """Descending step sequence from T to 1, evenly spaced."""
    return np.unique(np.round(np.linspace(1, T, steps)).astype(int))[::-1]


def ddim_sample_latents(unet, schedule, z_shape, c_img, c_txt, null_txt, gcfg,
                        clip_range=None):
    """Run the guided reverse process; returns final latents (B, L, H, W).

    Deterministic for eta=0 and a fixed seed. clip_range, when given,
    clamps the predicted clean latent each step (pixel-space codecs).
    strength < 1 starts the trajectory from the input latent noised to
    round(strength * T) instead of pure noise at T.
    """
    gcfg.validate()
    from .schedule import forward_diffuse
    rng = np.random.default_rng(gcfg.seed)
    b = c_img.shape[0]
    t_start = max(1, int(round(gcfg.strength * schedule.T)))
    if gcfg.strength >= 1.0:
        z = rng.standard_normal((b,) + tuple(z_shape), dtype=np.float32)
    else:
        eps0 = rng.standard_normal((b,) + tuple(z_shape), dtype=np.float32)
        z = forward_diffuse(np.asarray(c_img, dtype=np.float32),
                            np.full(b, t_start), eps0, schedule)
    taus = ddim_timesteps(t_start, gcfg.steps)
    for i, t in enumerate(taus):
        t_prev = taus[i + 1] if i + 1 < len(taus) else 0
        ab_t = schedule.alpha_bar(int(t))
        ab_p = schedule.alpha_bar(int(t_prev))
        eps = guided_noise(unet, z, np.full(b, t), c_img, c_txt,
                           gcfg.s_img, gcfg.s_text, null_txt).astype(np.float64)
        z64 = z.astype(np.float64)
        x0 = (z64 - np.sqrt(1.0 - ab_t) * eps) / np.sqrt(ab_t)
        if clip_range is not None:
            x0 = np.clip(x0, clip_range[0], clip_range[1])
        sigma = gcfg.eta * np.sqrt((1.0 - ab_p) / (1.0 - ab_t)) * np.sqrt(
            max(0.0, 1.0 - ab_t / ab_p))
        mean = np.sqrt(ab_p) * x0 + np.sqrt(max(0.0, 1.0 - ab_p - sigma ** 2)) * eps
        if gcfg.eta > 0 and t_prev > 0:
            mean = mean + sigma * rng.standard_normal(z.shape)
        z = mean.astype(np.float32)
    return z


def ddim_sample(stack, image, instruction_text, gcfg):
    """Edit one image (H, W, 3) under an instruction; returns the edit."""
    return ddim_sample_batch(stack, np.asarray(image)[None], [instruction_text], gcfg)[0]


def ddim_sample_batch(stack, images, instructions, gcfg):
    """Vectorised sampling over a batch of (image, instruction) pairs."""
    if not stack.embedder.trained:
        raise ModelError("embedder is untrained")
    if not stack.trained:
        raise ModelError("denoiser is untrained; run train-diffusion first")
    c_img = stack.codec.encode(images)
    c_txt = stack.embedder.embed_text(list(instructions))
    c_txt = np.atleast_2d(c_txt)
    clip = (0.0, 1.0) if stack.codec.mode == "identity" else None
    z = ddim_sample_latents(stack.unet, stack.schedule, c_img.shape[1:], c_img,
                            c_txt, stack.null_text_embedding, gcfg,
                            clip_range=clip)
    return stack.codec.decode(z)
