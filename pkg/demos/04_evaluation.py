"""WER/CER evaluation: per-segment breakdowns and pooled corpus rates.

Run: python3 demos/04_evaluation.py
"""

from versealign.metrics import cer, evaluate, render_report, wer

print("single pair:")
print("  wer('okwu ka oba', 'okwu ko oba') =", wer("okwu ka oba", "okwu ko oba"))
print("  cer('ọkụ', 'oku') =", cer("ọkụ", "oku"))

# Corpus rates pool error counts and reference lengths across segments.
# A short bad segment therefore cannot dominate a long good one the way
# it would if per-segment rates were averaged.
pairs = [
    ("seg_001", "oba ka buba", "oba ka buba"),
    ("seg_002", "aba", "oba"),
    ("seg_003", "ka oba buk aba", "ka oba buk"),
]
report = evaluate(pairs)
print("\n" + render_report(report))

mean_of_rates = sum(s.words.rate for s in report.segments) / len(report.segments)
print(f"\npooled WER {report.wer:.6f} vs naive mean of rates {mean_of_rates:.6f}")
