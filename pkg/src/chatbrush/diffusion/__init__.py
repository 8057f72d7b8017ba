from .codec import (IDENTITY, TINY_AE, LatentCodec, TinyAutoencoder, load_codec,
                    reconstruction_mse, save_codec, train_autoencoder)
from .editor import EditorStack, load_stack, new_stack, save_stack
from .guidance import GuidanceConfig, guided_noise
from .sampler import ddim_sample, ddim_sample_batch, ddim_timesteps
from .schedule import NoiseSchedule, forward_diffuse
from .train import (DropoutConfig, PairDataset, TrainConfig,
                    apply_condition_dropout, train, training_step)
from .unet import CondUNet, sinusoidal_embedding
