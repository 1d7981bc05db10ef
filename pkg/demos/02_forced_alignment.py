"""Forced alignment: recover per-token time spans for a known transcript.

Run: python3 demos/02_forced_alignment.py
"""

import numpy as np

from versealign import LabelSequence, LogProbMatrix, forced_align
from versealign.pipeline import synth_emissions
from versealign.text import build_vocab, encode_labels

text = "oba ka oba"
vocab = build_vocab([text])
print("vocab:", vocab.tokens)

# Synthetic emissions that hold each token for 4 frames (80 ms at the
# default 20 ms stride); in production these come from an acoustic
# model via an emission file.
emissions = synth_emissions(text, vocab, frames_per_token=4)
labels = LabelSequence(encode_labels(text, vocab))

path, spans, score = forced_align(emissions, labels)
print(f"\nalignment score: {score:.4f} (log-probability of the best path)")
print(f"{'token':<8}{'frames':<12}time")
for span in spans:
    t0 = span.start_frame * emissions.frame_duration
    t1 = span.end_frame * emissions.frame_duration
    print(f"{vocab.tokens[span.token]:<8}"
          f"[{span.start_frame:2d},{span.end_frame:2d})      "
          f"{t0:.2f}s - {t1:.2f}s")

# The wildcard option absorbs untranscribed lead-in audio (chapter
# introductions, throat clearing) before the first transcript token.
print("\nwildcard example: transcript starts 3 frames into the audio")
lead_in = synth_emissions("bbb", vocab, frames_per_token=1)
body = synth_emissions("oba", vocab, frames_per_token=2)
combined = LogProbMatrix(np.vstack([lead_in.values, body.values]),
                         frame_duration=emissions.frame_duration,
                         tokens=vocab.tokens)
short_labels = LabelSequence(encode_labels("oba", vocab))
_, spans, _ = forced_align(combined, short_labels, wildcard=True)
for span in spans:
    print(f"  {vocab.tokens[span.token]} -> frames [{span.start_frame}, {span.end_frame})")
