from .model import ARCH_TAG, EMBED_DIM, EmbedModel, ImageEncoder, TextEncoder
from .similarity import MIN_DIRECTION_NORM, ZeroDirectionError, directional_similarity
from .train import (info_nce_loss, load_embed_checkpoint, save_embed_checkpoint,
                    train_contrastive)
from .vocab import (BOS, EOS, MAX_LEN, NULL, NULL_TEXT, PAD, UNK, Vocab,
                    build_dialogue_vocab, build_vocab)
