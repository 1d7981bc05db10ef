"""versealign: corpus construction and evaluation toolkit built around
CTC forced alignment of long-form speech to known transcripts."""

from .ctc import (
    AlignmentPath,
    LabelSequence,
    LogProbMatrix,
    PaddedBatch,
    TokenSpan,
    ctc_gradient,
    ctc_log_likelihood,
    ctc_loss,
    forced_align,
    greedy_decode,
    pad_batch,
)
from .metrics import cer, eval_report, levenshtein, wer
from .text import Vocab, build_vocab, encode_labels, normalize_line, romanize

__all__ = [
    "AlignmentPath", "LabelSequence", "LogProbMatrix", "PaddedBatch",
    "TokenSpan", "ctc_gradient", "ctc_log_likelihood", "ctc_loss",
    "forced_align", "greedy_decode", "pad_batch",
    "cer", "eval_report", "levenshtein", "wer",
    "Vocab", "build_vocab", "encode_labels", "normalize_line", "romanize",
]
