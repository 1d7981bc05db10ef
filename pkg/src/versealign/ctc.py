"""CTC lattice computations over precomputed emission log-probabilities.

Everything here runs in natural-log space. The lattice is the usual
blank-interleaved state expansion of a label sequence: for labels of
length L there are 2L+1 states, with blanks at even indices and the
k-th label token at state 2k+1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_softmax, logsumexp, softmax

NEG_INF = float("-inf")

ROW_NORM_TOL = 1e-3
PAD_LABEL = -100


class InvalidLabelError(ValueError):
    """A label token is out of vocabulary range or equal to blank."""


class InfeasibleLabelError(ValueError):
    """The label sequence admits no alignment for the given frame count."""


class IncompatibleBatchError(ValueError):
    """Batch items disagree on vocabulary size or frame duration."""


class EmissionFileError(ValueError):
    """Malformed emission matrix file; carries a 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class LogProbMatrix:
    """T x V per-frame emission log-probabilities.

    Rows must be normalized distributions (|logsumexp| <= 1e-3) and every
    entry must be a valid log-probability (<= 1e-3).
    """

    values: np.ndarray
    frame_duration: float = 0.02
    blank_index: int = 0
    tokens: tuple[str, ...] | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2:
            raise ValueError(f"expected a 2-D matrix, got shape {vals.shape}")
        t, v = vals.shape
        if t < 1:
            raise ValueError("need at least one frame")
        if v < 2:
            raise ValueError("vocabulary must include blank plus one token")
        if not self.frame_duration > 0:
            raise ValueError(f"frame_duration must be positive, got {self.frame_duration}")
        if not 0 <= self.blank_index < v:
            raise ValueError(f"blank_index {self.blank_index} outside [0, {v})")
        if np.any(vals > ROW_NORM_TOL):
            raise ValueError("entries must be log-probabilities (<= 1e-3)")
        row_sums = logsumexp(vals, axis=1)
        bad = np.nonzero(np.abs(row_sums) > ROW_NORM_TOL)[0]
        if bad.size:
            raise ValueError(f"row {bad[0]} is not a normalized distribution "
                             f"(|logsumexp| = {abs(row_sums[bad[0]]):.3g})")
        if self.tokens is not None and len(self.tokens) != v:
            raise ValueError("token list length must equal vocab size")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def num_frames(self) -> int:
        return self.values.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LabelSequence:
    """Token indices of a transcript; never contains blank."""

    tokens: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(int(t) for t in self.tokens))

    def __len__(self) -> int:
        return len(self.tokens)

    def validate_against(self, emissions: LogProbMatrix) -> None:
        for t in self.tokens:
            if not 0 <= t < emissions.vocab_size:
                raise InvalidLabelError(
                    f"token {t} outside vocabulary [0, {emissions.vocab_size})")
            if t == emissions.blank_index:
                raise InvalidLabelError(f"token {t} equals the blank index")

    def min_frames(self) -> int:
        """Shortest alignment: one frame per token plus a blank between repeats."""
        n = len(self.tokens)
        repeats = sum(1 for a, b in zip(self.tokens, self.tokens[1:]) if a == b)
        return n + repeats


@dataclass(frozen=True)
class AlignmentPath:
    """Per-frame emitted symbols (blank allowed) of one alignment."""

    states: tuple[int, ...]


@dataclass(frozen=True)
class TokenSpan:
    token: int
    start_frame: int
    end_frame: int  # exclusive
    score: float

    def __post_init__(self):
        if not self.start_frame < self.end_frame:
            raise ValueError("span must cover at least one frame")


@dataclass(frozen=True)
class PaddedBatch:
    emissions: np.ndarray  # B x T_max x V
    emission_lengths: np.ndarray  # B
    labels: np.ndarray  # B x L_max
    label_lengths: np.ndarray  # B
    pad_label: int = PAD_LABEL
    frame_duration: float = 0.02
    blank_index: int = 0


WILDCARD_LOGPROB = math.log(0.5)


def collapse(symbols, blank_index: int) -> tuple[int, ...]:
    """Merge adjacent repeats, then drop blanks."""
    out = []
    prev = None
    for s in symbols:
        if s != prev:
            out.append(s)
        prev = s
    return tuple(s for s in out if s != blank_index)


def _lattice_symbols(labels: LabelSequence, blank_index: int) -> np.ndarray:
    syms = np.full(2 * len(labels) + 1, blank_index, dtype=np.int64)
    syms[1::2] = labels.tokens
    return syms


def _forward(log_probs: np.ndarray, syms: np.ndarray, blank_index: int) -> np.ndarray:
    """Log-domain forward pass over the expanded lattice; returns T x S alphas."""
    t_len, _ = log_probs.shape
    s_len = len(syms)
    # skip transition s-2 -> s allowed for token states whose symbol differs
    # from the one two states back
    can_skip = np.zeros(s_len, dtype=bool)
    can_skip[2:] = (syms[2:] != blank_index) & (syms[2:] != syms[:-2])

    alpha = np.full((t_len, s_len), NEG_INF)
    alpha[0, 0] = log_probs[0, syms[0]]
    if s_len > 1:
        alpha[0, 1] = log_probs[0, syms[1]]
    for t in range(1, t_len):
        stay = alpha[t - 1]
        step = np.full(s_len, NEG_INF)
        step[1:] = alpha[t - 1, :-1]
        skip = np.full(s_len, NEG_INF)
        if s_len > 2:
            skip[2:] = np.where(can_skip[2:], alpha[t - 1, :-2], NEG_INF)
        merged = logsumexp(np.stack([stay, step, skip]), axis=0)
        alpha[t] = merged + log_probs[t, syms]
    return alpha


def _backward(log_probs: np.ndarray, syms: np.ndarray, blank_index: int) -> np.ndarray:
    """Betas including the emission at their own frame."""
    t_len, _ = log_probs.shape
    s_len = len(syms)
    can_skip = np.zeros(s_len, dtype=bool)
    can_skip[:-2] = (syms[2:] != blank_index) & (syms[2:] != syms[:-2])

    beta = np.full((t_len, s_len), NEG_INF)
    beta[-1, -1] = log_probs[-1, syms[-1]]
    if s_len > 1:
        beta[-1, -2] = log_probs[-1, syms[-2]]
    for t in range(t_len - 2, -1, -1):
        stay = beta[t + 1]
        step = np.full(s_len, NEG_INF)
        step[:-1] = beta[t + 1, 1:]
        skip = np.full(s_len, NEG_INF)
        if s_len > 2:
            skip[:-2] = np.where(can_skip[:-2], beta[t + 1, 2:], NEG_INF)
        merged = logsumexp(np.stack([stay, step, skip]), axis=0)
        beta[t] = merged + log_probs[t, syms]
    return beta


def ctc_log_likelihood(emissions: LogProbMatrix, labels: LabelSequence) -> float:
    """log p(labels | emissions), summed over all alignments.

    Returns -inf when the label sequence needs more frames than available.
    """
    labels.validate_against(emissions)
    if labels.min_frames() > emissions.num_frames:
        return NEG_INF
    syms = _lattice_symbols(labels, emissions.blank_index)
    alpha = _forward(emissions.values, syms, emissions.blank_index)
    ends = alpha[-1, -1:] if len(syms) == 1 else alpha[-1, -2:]
    return float(logsumexp(ends))


def ctc_loss(emissions: LogProbMatrix, labels: LabelSequence) -> float:
    """Negative log-likelihood; +inf for infeasible labels."""
    return -ctc_log_likelihood(emissions, labels)


def ctc_gradient(logits: np.ndarray, labels: LabelSequence,
                 blank_index: int = 0) -> np.ndarray:
    """Gradient of the CTC loss with respect to raw per-frame scores.

    Equals softmax(logits) minus the forward-backward occupancy posterior,
    so every row sums to zero.
    """
    logits = np.asarray(logits, dtype=np.float64)
    log_probs = log_softmax(logits, axis=1)
    emissions = LogProbMatrix(log_probs, blank_index=blank_index)
    labels.validate_against(emissions)
    if labels.min_frames() > emissions.num_frames:
        raise InfeasibleLabelError(
            f"labels need {labels.min_frames()} frames, emissions have "
            f"{emissions.num_frames}")

    syms = _lattice_symbols(labels, blank_index)
    alpha = _forward(log_probs, syms, blank_index)
    beta = _backward(log_probs, syms, blank_index)
    ends = alpha[-1, -1:] if len(syms) == 1 else alpha[-1, -2:]
    log_z = logsumexp(ends)

    # state occupancies; alpha and beta both include the frame's emission,
    # so divide one copy back out
    log_gamma_states = alpha + beta - log_probs[:, syms] - log_z
    t_len, v = logits.shape
    gamma = np.zeros((t_len, v))
    for s, sym in enumerate(syms):
        gamma[:, sym] += np.exp(log_gamma_states[:, s])
    return softmax(logits, axis=1) - gamma


def greedy_decode(emissions: LogProbMatrix) -> LabelSequence:
    """Best-path decoding: per-frame argmax, collapse repeats, drop blanks.

    np.argmax already breaks ties toward the lowest index.
    """
    path = np.argmax(emissions.values, axis=1)
    return LabelSequence(collapse(path, emissions.blank_index))


def forced_align(
    emissions: LogProbMatrix,
    labels: LabelSequence,
    wildcard: bool = False,
    wildcard_logprob: float = WILDCARD_LOGPROB,
) -> tuple[AlignmentPath, list[TokenSpan], float]:
    """Max-probability alignment of a known transcript to the emissions.

    Returns the per-frame symbol path, one span per label token, and the
    path's log-score. Ties between equally likely paths are resolved by
    advancing through the lattice at the earliest possible frame.

    With ``wildcard`` set, a synthetic token scoring ``wildcard_logprob``
    per frame is prepended to soak up untranscribed lead-in audio; it
    appears in the path as symbol index V but gets no span.
    """
    labels.validate_against(emissions)
    log_probs = emissions.values
    blank = emissions.blank_index
    tokens = labels.tokens
    wild_sym = emissions.vocab_size
    if wildcard:
        wild_col = np.full((emissions.num_frames, 1), wildcard_logprob)
        log_probs = np.concatenate([log_probs, wild_col], axis=1)
        tokens = (wild_sym,) + tokens

    ext = LabelSequence.__new__(LabelSequence)
    object.__setattr__(ext, "tokens", tokens)
    if ext.min_frames() > emissions.num_frames:
        raise InfeasibleLabelError(
            f"labels need {ext.min_frames()} frames, emissions have "
            f"{emissions.num_frames}")

    syms = _lattice_symbols(ext, blank)
    t_len = emissions.num_frames
    s_len = len(syms)
    can_skip = np.zeros(s_len, dtype=bool)
    can_skip[2:] = (syms[2:] != blank) & (syms[2:] != syms[:-2])

    # delta[t, s]: best score of a path suffix entering state s at frame t.
    # Computed backward so the forward reconstruction below can resolve
    # ties by taking the largest admissible state at each frame, which is
    # exactly "advance as early as possible".
    delta = np.full((t_len, s_len), NEG_INF)
    delta[-1, -1] = log_probs[-1, syms[-1]]
    if s_len > 1:
        delta[-1, -2] = log_probs[-1, syms[-2]]
    for t in range(t_len - 2, -1, -1):
        stay = delta[t + 1]
        step = np.full(s_len, NEG_INF)
        step[:-1] = delta[t + 1, 1:]
        skip = np.full(s_len, NEG_INF)
        if s_len > 2:
            skip[:-2] = np.where(can_skip[2:], delta[t + 1, 2:], NEG_INF)
        delta[t] = np.maximum(np.maximum(stay, step), skip) + log_probs[t, syms]

    starts = [0, 1] if s_len > 1 else [0]
    score = max(delta[0, s] for s in starts)
    if score == NEG_INF:
        raise InfeasibleLabelError("no feasible alignment")

    state = max(s for s in starts if delta[0, s] == score)
    states = [state]
    for t in range(1, t_len):
        succs = [state]
        if state + 1 < s_len:
            succs.append(state + 1)
        if state + 2 < s_len and can_skip[state + 2]:
            succs.append(state + 2)
        best = max(delta[t, s] for s in succs)
        state = max(s for s in succs if delta[t, s] == best)
        states.append(state)

    path = AlignmentPath(tuple(int(syms[s]) for s in states))

    spans: list[TokenSpan] = []
    t = 0
    while t < t_len:
        s = states[t]
        if syms[s] != blank and syms[s] != wild_sym:
            start = t
            while t + 1 < t_len and states[t + 1] == s:
                t += 1
            span_score = float(np.sum(log_probs[start:t + 1, syms[s]]))
            spans.append(TokenSpan(int(syms[s]), start, t + 1, span_score))
        t += 1
    return path, spans, float(score)


def pad_batch(items: list[tuple[LogProbMatrix, LabelSequence]],
              pad_label: int = PAD_LABEL) -> PaddedBatch:
    """Stack variable-length items, padding emissions with blank-one-hot rows."""
    if not items:
        raise IncompatibleBatchError("cannot pad an empty batch")
    first_em = items[0][0]
    v = first_em.vocab_size
    for em, _ in items[1:]:
        if em.vocab_size != v:
            raise IncompatibleBatchError(
                f"mixed vocab sizes: {v} vs {em.vocab_size}")
        if em.frame_duration != first_em.frame_duration:
            raise IncompatibleBatchError("mixed frame durations")
        if em.blank_index != first_em.blank_index:
            raise IncompatibleBatchError("mixed blank indices")

    t_max = max(em.num_frames for em, _ in items)
    l_max = max((len(lab) for _, lab in items), default=0)
    b = len(items)

    blank_row = np.full(v, NEG_INF)
    blank_row[first_em.blank_index] = 0.0

    emissions = np.tile(blank_row, (b, t_max, 1))
    labels = np.full((b, l_max), pad_label, dtype=np.int64)
    em_lens = np.zeros(b, dtype=np.int64)
    lab_lens = np.zeros(b, dtype=np.int64)
    for i, (em, lab) in enumerate(items):
        emissions[i, :em.num_frames] = em.values
        labels[i, :len(lab)] = lab.tokens
        em_lens[i] = em.num_frames
        lab_lens[i] = len(lab)
    return PaddedBatch(emissions, em_lens, labels, lab_lens, pad_label,
                       first_em.frame_duration, first_em.blank_index)


def write_emission_file(path, emissions: LogProbMatrix, tokens=None) -> None:
    """Text emission format: header, vocab line, then one row per frame."""
    tokens = tokens or emissions.tokens
    if tokens is None:
        raise ValueError("vocabulary tokens required to write an emission file")
    if list(tokens).index("<pad>") != emissions.blank_index:
        raise ValueError("<pad> must sit at the blank index")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(f"{emissions.num_frames} {emissions.vocab_size} "
                f"{emissions.frame_duration!r}\n")
        f.write(" ".join(tokens) + "\n")
        for row in emissions.values:
            f.write(" ".join(repr(float(x)) for x in row) + "\n")


def read_emission_file(path) -> LogProbMatrix:
    """Parse the text emission format, rejecting unnormalized rows by line."""
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines:
        raise EmissionFileError(1, "empty file")
    header = lines[0].split()
    if len(header) != 3:
        raise EmissionFileError(1, "header must be 'T V frame_duration'")
    try:
        t_len, v = int(header[0]), int(header[1])
        frame_duration = float(header[2])
    except ValueError as e:
        raise EmissionFileError(1, f"bad header value: {e}") from None
    if len(lines) < 2:
        raise EmissionFileError(2, "missing vocabulary line")
    tokens = tuple(lines[1].split())
    if len(tokens) != v:
        raise EmissionFileError(2, f"expected {v} tokens, got {len(tokens)}")
    if "<pad>" not in tokens:
        raise EmissionFileError(2, "vocabulary must contain <pad> (blank)")
    blank_index = tokens.index("<pad>")
    if len(lines) < t_len + 2:
        raise EmissionFileError(len(lines) + 1,
                                f"expected {t_len} emission rows, file ends early")
    values = np.empty((t_len, v))
    for i in range(t_len):
        lineno = i + 3
        parts = lines[i + 2].split()
        if len(parts) != v:
            raise EmissionFileError(lineno, f"expected {v} values, got {len(parts)}")
        try:
            row = np.array([float(p) for p in parts])
        except ValueError as e:
            raise EmissionFileError(lineno, f"bad number: {e}") from None
        if abs(logsumexp(row)) > ROW_NORM_TOL:
            raise EmissionFileError(
                lineno, f"row is not a normalized log-distribution "
                        f"(|logsumexp| = {abs(logsumexp(row)):.3g})")
        values[i] = row
    return LogProbMatrix(values, frame_duration=frame_duration,
                         blank_index=blank_index, tokens=tokens)
