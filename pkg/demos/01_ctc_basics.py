"""Walkthrough of the core CTC computations on tiny emission matrices.

Run: python3 demos/01_ctc_basics.py
"""

import math

import numpy as np

from versealign import (
    LabelSequence,
    LogProbMatrix,
    ctc_gradient,
    ctc_log_likelihood,
    ctc_loss,
    greedy_decode,
)

# Two frames, two symbols (blank at index 0, token "a" at index 1),
# every probability 0.5. Of the four length-2 paths, three collapse
# to "a": (a,a), (a,-), (-,a). So p("a") = 3 * 0.25 = 0.75.
emissions = LogProbMatrix(np.full((2, 2), math.log(0.5)))
labels = LabelSequence((1,))

print("log p(Y|X) =", ctc_log_likelihood(emissions, labels))
print("ln 0.75    =", math.log(0.75))
print("loss       =", ctc_loss(emissions, labels))

# A repeated token needs a separating blank, so "aa" cannot fit in
# two frames and the likelihood collapses to -inf.
print("\nlog p('aa'|X) over 2 frames =",
      ctc_log_likelihood(emissions, LabelSequence((1, 1))))

# The gradient is taken with respect to raw (pre-softmax) scores.
# With equal logits the occupancy of token "a" at each frame is 2/3,
# so the gradient entry is 0.5 - 2/3 = -1/6.
grad = ctc_gradient(np.zeros((2, 2)), labels)
print("\ngradient w.r.t. logits:\n", grad)
print("row sums (always 0):", grad.sum(axis=1))

# Greedy decoding: per-frame argmax, merge repeats, drop blanks.
strong = LogProbMatrix(np.log(np.array([
    [0.05, 0.90, 0.05],   # token 1
    [0.05, 0.90, 0.05],   # token 1 (repeat, merges)
    [0.90, 0.05, 0.05],   # blank
    [0.05, 0.05, 0.90],   # token 2
])))
print("\ngreedy decode:", greedy_decode(strong).tokens, "(expected (1, 2))")
