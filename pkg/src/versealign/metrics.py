"""Word and character error rates via Levenshtein alignment.

Corpus-level rates pool substitution/deletion/insertion counts and
reference lengths across segments rather than averaging per-segment
rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .text import grapheme_clusters, normalize_line


@dataclass(frozen=True)
class ErrorBreakdown:
    substitutions: int
    deletions: int
    insertions: int
    reference_length: int

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def rate(self) -> float:
        if self.reference_length == 0:
            return 0.0 if self.errors == 0 else math.inf
        return self.errors / self.reference_length

    @property
    def undefined_reference(self) -> bool:
        """Empty reference against a non-empty hypothesis: rate is meaningless."""
        return self.reference_length == 0 and self.errors > 0


def levenshtein(reference, hypothesis) -> ErrorBreakdown:
    """Minimal edit script turning reference into hypothesis.

    Among minimal-cost scripts, substitutions are preferred over
    deletions, and deletions over insertions, so the breakdown is
    deterministic.
    """
    ref = list(reference)
    hyp = list(hypothesis)
    if ref == hyp:
        return ErrorBreakdown(0, 0, 0, len(ref))

    n, m = len(ref), len(hyp)
    # dp[i][j] = (cost, subs, dels, ins) for ref[:i] -> hyp[:j]
    prev = [(j, 0, 0, j) for j in range(m + 1)]
    for i in range(1, n + 1):
        cur = [(i, 0, i, 0)]
        for j in range(1, m + 1):
            if ref[i - 1] == hyp[j - 1]:
                cur.append(prev[j - 1])
                continue
            dc, ds, dd, di = prev[j - 1]  # substitute
            uc, us, ud, ui = prev[j]      # delete ref token
            lc, ls, ld, li = cur[j - 1]   # insert hyp token
            best = min(dc, uc, lc)
            if dc == best:
                cur.append((dc + 1, ds + 1, dd, di))
            elif uc == best:
                cur.append((uc + 1, us, ud + 1, ui))
            else:
                cur.append((lc + 1, ls, ld, li + 1))
        prev = cur
    cost, s, d, ins = prev[m]
    assert cost == s + d + ins
    return ErrorBreakdown(s, d, ins, n)


def word_breakdown(reference: str, hypothesis: str) -> ErrorBreakdown:
    return levenshtein(reference.split(), hypothesis.split())


def char_breakdown(reference: str, hypothesis: str) -> ErrorBreakdown:
    """Grapheme-cluster tokens; internal single spaces count as tokens."""
    return levenshtein(grapheme_clusters(reference), grapheme_clusters(hypothesis))


def wer(reference: str, hypothesis: str) -> float:
    """(S+D+I)/N over whitespace-delimited words; inf on empty reference
    with a non-empty hypothesis."""
    return word_breakdown(reference, hypothesis).rate


def cer(reference: str, hypothesis: str) -> float:
    return char_breakdown(reference, hypothesis).rate


def pool(breakdowns) -> ErrorBreakdown:
    """Sum error counts and reference lengths across segments."""
    s = d = i = n = 0
    for b in breakdowns:
        s += b.substitutions
        d += b.deletions
        i += b.insertions
        n += b.reference_length
    return ErrorBreakdown(s, d, i, n)


@dataclass(frozen=True)
class SegmentResult:
    segment_id: str
    reference: str
    hypothesis: str
    words: ErrorBreakdown
    chars: ErrorBreakdown


@dataclass(frozen=True)
class EvalReport:
    segments: tuple[SegmentResult, ...]
    word_total: ErrorBreakdown
    char_total: ErrorBreakdown

    @property
    def wer(self) -> float:
        return self.word_total.rate

    @property
    def cer(self) -> float:
        return self.char_total.rate


def format_rate(rate: float) -> str:
    return "inf" if math.isinf(rate) else f"{rate:.6f}"


def evaluate(pairs) -> EvalReport:
    """Score (id, reference, hypothesis) triples; inputs must be normalized.

    Raises on duplicate segment ids.
    """
    seen: set[str] = set()
    results = []
    for seg_id, reference, hypothesis in pairs:
        if seg_id in seen:
            raise ValueError(f"duplicate hypothesis id {seg_id!r}")
        seen.add(seg_id)
        results.append(SegmentResult(
            seg_id, reference, hypothesis,
            word_breakdown(reference, hypothesis),
            char_breakdown(reference, hypothesis)))
    return EvalReport(tuple(results),
                      pool(r.words for r in results),
                      pool(r.chars for r in results))


def eval_report(records, hypotheses: dict[str, str]) -> EvalReport:
    """Evaluate manifest records against a hypothesis map keyed by segment id.

    Missing hypotheses count as empty strings (all deletions). Hypotheses
    are normalized the same way as references before comparison.
    """
    if len(hypotheses) != len(set(hypotheses)):
        raise ValueError("duplicate hypothesis ids")
    pairs = []
    for rec in records:
        hyp = hypotheses.get(rec.id, "")
        pairs.append((rec.id, rec.normalized_text, normalize_line(hyp)))
    return evaluate(pairs)


def render_report(report: EvalReport) -> str:
    """Human-readable per-segment table plus pooled totals."""
    lines = [f"{'id':<24} {'WER':>10} {'CER':>10}  reference"]
    for seg in report.segments:
        lines.append(f"{seg.segment_id:<24} {format_rate(seg.words.rate):>10} "
                     f"{format_rate(seg.chars.rate):>10}  {seg.reference}")
    lines.append("-" * 48)
    lines.append(f"corpus WER {format_rate(report.wer)}  "
                 f"(errors {report.word_total.errors} / words {report.word_total.reference_length})")
    lines.append(f"corpus CER {format_rate(report.cer)}  "
                 f"(errors {report.char_total.errors} / chars {report.char_total.reference_length})")
    return "\n".join(lines)


def report_records(report: EvalReport):
    """Machine-readable form: one dict per segment plus a totals dict."""
    out = []
    for seg in report.segments:
        out.append({
            "id": seg.segment_id,
            "wer": seg.words.rate,
            "cer": seg.chars.rate,
            "word_errors": seg.words.errors,
            "word_ref_len": seg.words.reference_length,
            "char_errors": seg.chars.errors,
            "char_ref_len": seg.chars.reference_length,
        })
    out.append({
        "id": "__total__",
        "wer": report.wer,
        "cer": report.cer,
        "word_errors": report.word_total.errors,
        "word_ref_len": report.word_total.reference_length,
        "char_errors": report.char_total.errors,
        "char_ref_len": report.char_total.reference_length,
    })
    return out
