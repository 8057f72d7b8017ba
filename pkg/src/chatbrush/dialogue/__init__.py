from .instruction import ExplicitInstruction
from .rules import (AMBIGUOUS, CHATTER, DIRECT, FORGET, ClassifiedIntent,
                    DialogueState, PendingOp, Turn, detect_ambiguity, respond)
from .slots import Extraction, build_op, extract, missing_slots, required_slots
from .seq2seq import (MAX_CTX, MAX_TGT, Seq2SeqModel, dialogue_examples,
                      encode_context, encode_target)
from .train import (generate_reply, load_dialogue_checkpoint, perplexity,
                    save_dialogue_checkpoint, train_seq2seq, unigram_perplexity)
