from .datasets import (EditPair, build_datasets, load_dialogues, load_manifest,
                       load_pairs, make_dialogue, make_pair, pair_slice,
                       read_jsonl, split_ranges, write_jsonl)
from .filtering import filter_pairs, score_pair, tau_for_precision
from .generate import (DialogueSample, gen_dialogue, gen_instruction,
                       replay_dialogue, validate_dialogue_sample)
from .textgen import (AMBIGUITY_TAGS, TAG_AMBIGUOUS, TAG_DIRECT, TAG_FORGET,
                      TAG_KINDS, TAG_MISSING, HttpTextGenerator,
                      TemplateTextGenerator, TextGenerator)
