"""End-to-end corpus build on synthetic data, entirely in a temp dir:
pair discovery, chapter alignment, audio segmentation, filtering,
splitting, and manifest/CSV emission.

Run: python3 demos/03_build_corpus.py
"""

import os
import tempfile

import numpy as np

from versealign.audio import AudioBuffer, cut_segment, load_wav, peak_normalize, save_wav
from versealign.ctc import read_emission_file, write_emission_file
from versealign.pipeline import (
    FilterRules,
    align_chapter,
    discover_pairs,
    emit_manifest,
    emit_metadata_csv,
    filter_segments,
    split_dataset,
    synth_emissions,
)
from versealign.text import build_vocab, normalize_line

chapters = {
    "Mark_01": ["Oba ka buba.", "Ka oba!", "Buk aba oba."],
    "Mark_02": ["Aba buk ka.", "Oba buba aba."],
}

work = tempfile.mkdtemp(prefix="versealign_demo_")
audio_dir = os.path.join(work, "audio")
text_dir = os.path.join(work, "text")
os.makedirs(audio_dir)
os.makedirs(text_dir)

# Stage the source files the way they would arrive from the recordings
# archive, then let discovery canonicalize and pair them.
vocab = build_vocab([normalize_line(v) for vs in chapters.values() for v in vs])
rng = np.random.default_rng(0)
for chapter_id, verses in chapters.items():
    with open(os.path.join(text_dir, f"{chapter_id}.txt"), "w") as f:
        f.write("\n".join(verses) + "\n")
    joined = " ".join(normalize_line(v) for v in verses)
    emissions = synth_emissions(joined, vocab, frames_per_token=30)
    write_emission_file(os.path.join(work, f"{chapter_id}.emissions.txt"), emissions)
    n = round(emissions.num_frames * emissions.frame_duration * 16000)
    save_wav(os.path.join(audio_dir, f"{chapter_id}.wav"),
             AudioBuffer(rng.uniform(-0.3, 0.3, n), 16000))

pairs, unmatched = discover_pairs(audio_dir, text_dir)
print(f"discovered {len(pairs)} chapter pairs, {len(unmatched)} unmatched files")

records = []
seg_dir = os.path.join(work, "segments")
os.makedirs(seg_dir)
for pair in pairs:
    emissions = read_emission_file(os.path.join(work, f"{pair.chapter_id}.emissions.txt"))
    chapter_records = align_chapter(pair, emissions, vocab)
    print(f"{pair.chapter_id}: {len(chapter_records)} verse segments")

    buf = peak_normalize(load_wav(pair.audio_path))
    for rec in chapter_records:
        start = round(rec.audio_start_sec / emissions.frame_duration)
        end = round((rec.audio_start_sec + rec.duration) / emissions.frame_duration)
        cut = cut_segment(buf, start, end, emissions.frame_duration)
        save_wav(os.path.join(seg_dir, rec.audio_filepath), cut)
    records.extend(chapter_records)

# The synthetic emissions hold each token for 0.6 s, far slower than
# real speech, so relax the speaking-rate floors for this demo.
rules = FilterRules(min_duration=0.5, min_word_rate=0.1, min_char_rate=0.5)
kept, rejected = filter_segments(records, rules)
print(f"\nfilter: kept {len(kept)}, rejected {len(rejected)}")
for rec, reason in rejected:
    print(f"  {rec.id}: {reason}")

kept = split_dataset(kept, ratio=0.8, seed=13)
manifest_path = os.path.join(work, "manifest.jsonl")
emit_manifest(kept, manifest_path)
emit_metadata_csv(kept, os.path.join(work, "metadata.csv"))

n_train = sum(1 for r in kept if r.split == "train")
print(f"split: {n_train} train / {len(kept) - n_train} test")
print(f"\nartifacts in {work}:")
for name in sorted(os.listdir(work)):
    print(" ", name)
