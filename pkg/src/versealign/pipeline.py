"""End-to-end corpus construction: file-pair discovery, chapter alignment,
quality statistics, filtering, splitting, and manifest/CSV emission."""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import random
import re
from dataclasses import dataclass, field, replace

import numpy as np

from .ctc import LabelSequence, LogProbMatrix, forced_align
from .text import Vocab, encode_labels, grapheme_clusters, normalize_line, romanize

logger = logging.getLogger(__name__)

TAG_HIGH = "High"
TAG_LOW = "Low"
TAG_FIXABLE = "Fixable"
TAG_UNTAGGED = "Untagged"
QUALITY_TAGS = (TAG_HIGH, TAG_LOW, TAG_FIXABLE)

SPLIT_TRAIN = "train"
SPLIT_TEST = "test"
SPLIT_UNASSIGNED = "unassigned"

MANIFEST_CORE_FIELDS = ("audio_start_sec", "audio_filepath", "duration",
                        "text", "normalized_text", "uroman_tokens")

# USFM-style New Testament book codes as they appear in source text filenames.
BOOK_CODES = {
    "MAT": "Matthew", "MRK": "Mark", "LUK": "Luke", "JHN": "John",
    "ACT": "Acts", "ROM": "Romans", "1CO": "1Corinthians", "2CO": "2Corinthians",
    "GAL": "Galatians", "EPH": "Ephesians", "PHP": "Philippians",
    "COL": "Colossians", "1TH": "1Thessalonians", "2TH": "2Thessalonians",
    "1TI": "1Timothy", "2TI": "2Timothy", "TIT": "Titus", "PHM": "Philemon",
    "HEB": "Hebrews", "JAS": "James", "1PE": "1Peter", "2PE": "2Peter",
    "1JN": "1John", "2JN": "2John", "3JN": "3John", "JUD": "Jude",
    "REV": "Revelation",
}


class ChapterAlignmentError(RuntimeError):
    pass


class InvalidRecordError(ValueError):
    pass


class FilterConfigError(ValueError):
    pass


class EmptyDatasetError(ValueError):
    pass


class ManifestError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class SegmentRecord:
    """One manifest entry for a verse-level audio segment."""

    id: str
    audio_filepath: str
    audio_start_sec: float
    duration: float
    text: str
    normalized_text: str
    uroman_tokens: str
    word_count: int = 0
    char_count: int = 0
    word_rate: float = 0.0
    char_rate: float = 0.0
    quality_tag: str = TAG_UNTAGGED
    split: str = SPLIT_UNASSIGNED
    extras: tuple = ()

    def __post_init__(self):
        if self.duration <= 0:
            raise InvalidRecordError(f"{self.id}: duration must be positive")
        if self.audio_start_sec < 0:
            raise InvalidRecordError(f"{self.id}: negative start time")
        if self.quality_tag not in QUALITY_TAGS + (TAG_UNTAGGED,):
            raise InvalidRecordError(f"{self.id}: bad tag {self.quality_tag!r}")
        if self.split not in (SPLIT_TRAIN, SPLIT_TEST, SPLIT_UNASSIGNED):
            raise InvalidRecordError(f"{self.id}: bad split {self.split!r}")
        object.__setattr__(self, "extras", tuple(self.extras))

    @property
    def chapter_id(self) -> str:
        return self.id.rsplit("_", 1)[0]


@dataclass(frozen=True)
class ChapterPair:
    chapter_id: str
    audio_path: str
    text_path: str
    verse_lines: tuple[str, ...]


def canonical_key(filename: str) -> str | None:
    """Map a source filename to its `Book_NN` chapter key, or None."""
    stem = os.path.splitext(os.path.basename(filename))[0]

    m = re.fullmatch(r"([1-3]?[A-Za-z]+)_(\d{2})", stem)
    if m:
        return f"{m.group(1)}_{m.group(2)}"
    # audio convention: B01__01_Matthew__IKKTBLN1DA
    m = re.fullmatch(r"[AB]\d+__(\d+)_([1-3]?[A-Za-z]+)__\w+", stem)
    if m:
        return f"{m.group(2)}_{int(m.group(1)):02d}"
    # text convention: ikkNT_070_MAT_01_read
    m = re.fullmatch(r"\w+?_\d+_([0-9A-Z]{3})_(\d+)_\w+", stem)
    if m and m.group(1) in BOOK_CODES:
        return f"{BOOK_CODES[m.group(1)]}_{int(m.group(2)):02d}"
    return None


def discover_pairs(audio_dir, text_dir) -> tuple[list[ChapterPair], list[str]]:
    """Match audio and text files by canonical chapter key.

    Returns (pairs, unmatched filenames). Unmatched or unparseable files
    are reported, never fatal.
    """
    audio_by_key: dict[str, str] = {}
    text_by_key: dict[str, str] = {}
    unmatched: list[str] = []

    for d, index in ((audio_dir, audio_by_key), (text_dir, text_by_key)):
        for name in sorted(os.listdir(d)):
            path = os.path.join(d, name)
            if not os.path.isfile(path):
                continue
            key = canonical_key(name)
            if key is None:
                unmatched.append(path)
            elif key in index:
                logger.warning("duplicate key %s: %s shadows %s", key, index[key], path)
                unmatched.append(path)
            else:
                index[key] = path

    pairs = []
    for key in sorted(audio_by_key.keys() & text_by_key.keys()):
        text_path = text_by_key[key]
        with open(text_path, encoding="utf-8") as f:
            verse_lines = tuple(line.rstrip("\n") for line in f)
        pairs.append(ChapterPair(key, audio_by_key[key], text_path, verse_lines))
    for key in sorted(audio_by_key.keys() ^ text_by_key.keys()):
        unmatched.append(audio_by_key.get(key) or text_by_key[key])
    return pairs, unmatched


def compute_quality_stats(record: SegmentRecord) -> SegmentRecord:
    """Fill word/char counts and per-second rates from the normalized text."""
    if record.duration <= 0:
        raise InvalidRecordError(f"{record.id}: duration must be positive")
    words = record.normalized_text.split()
    chars = [c for c in grapheme_clusters(record.normalized_text) if c != " "]
    return replace(record,
                   word_count=len(words), char_count=len(chars),
                   word_rate=len(words) / record.duration,
                   char_rate=len(chars) / record.duration)


def align_chapter(pair: ChapterPair, emissions: LogProbMatrix, vocab: Vocab,
                  wildcard: bool = False) -> list[SegmentRecord]:
    """Forced-align a whole chapter and emit one record per verse.

    Verses are concatenated with the word delimiter token for alignment;
    the delimiter's frames belong to neither adjacent verse.
    """
    verses = []  # (raw, normalized, token tuple)
    for raw in pair.verse_lines:
        norm = normalize_line(raw)
        if not norm:
            logger.warning("%s: skipping verse that normalizes to empty: %r",
                           pair.chapter_id, raw)
            continue
        verses.append((raw, norm, encode_labels(norm, vocab)))
    if not verses:
        raise ChapterAlignmentError(f"{pair.chapter_id}: no usable verses")

    concat: list[int] = []
    verse_token_slices = []
    for i, (_, _, tokens) in enumerate(verses):
        if i:
            concat.append(vocab.delimiter_index)
        verse_token_slices.append((len(concat), len(concat) + len(tokens)))
        concat.extend(tokens)

    try:
        _, spans, _ = forced_align(emissions, LabelSequence(tuple(concat)),
                                   wildcard=wildcard)
    except Exception as e:
        raise ChapterAlignmentError(f"{pair.chapter_id}: {e}") from e

    records = []
    for idx, ((raw, norm, _), (lo, hi)) in enumerate(zip(verses, verse_token_slices)):
        start = spans[lo].start_frame
        end = spans[hi - 1].end_frame
        rec = SegmentRecord(
            id=f"{pair.chapter_id}_{idx:03d}",
            audio_filepath=f"{pair.chapter_id}_{idx:03d}.wav",
            audio_start_sec=start * emissions.frame_duration,
            duration=(end - start) * emissions.frame_duration,
            text=raw,
            normalized_text=norm,
            uroman_tokens=romanize(norm),
        )
        records.append(compute_quality_stats(rec))
    return records


@dataclass(frozen=True)
class FilterRules:
    """Bounds are inclusive; None disables the bound."""

    min_duration: float | None = 1.0
    max_duration: float | None = 30.0
    min_word_rate: float | None = 0.4
    max_word_rate: float | None = 6.0
    min_char_rate: float | None = 2.0
    max_char_rate: float | None = 30.0
    require_tag_high: bool = False

    def __post_init__(self):
        for name in ("duration", "word_rate", "char_rate"):
            lo = getattr(self, f"min_{name}")
            hi = getattr(self, f"max_{name}")
            if lo is not None and hi is not None and lo > hi:
                raise FilterConfigError(f"min_{name} {lo} > max_{name} {hi}")

    @classmethod
    def disabled(cls) -> "FilterRules":
        return cls(None, None, None, None, None, None, False)


def filter_segments(records, rules: FilterRules):
    """Partition records into (kept, [(record, first violated rule)])."""
    kept = []
    rejected = []
    checks = [
        ("min_duration", lambda r: r.duration, True),
        ("max_duration", lambda r: r.duration, False),
        ("min_word_rate", lambda r: r.word_rate, True),
        ("max_word_rate", lambda r: r.word_rate, False),
        ("min_char_rate", lambda r: r.char_rate, True),
        ("max_char_rate", lambda r: r.char_rate, False),
    ]
    for rec in records:
        reason = None
        for name, get, is_min in checks:
            bound = getattr(rules, name)
            if bound is None:
                continue
            value = get(rec)
            if (is_min and value < bound) or (not is_min and value > bound):
                reason = f"{name}: {value:g} vs {bound:g}"
                break
        if reason is None and rules.require_tag_high and rec.quality_tag != TAG_HIGH:
            reason = f"require_tag_high: tag is {rec.quality_tag}"
        if reason is None:
            kept.append(rec)
        else:
            rejected.append((rec, reason))
    return kept, rejected


def split_dataset(records, ratio: float = 0.8, seed: int = 0,
                  by_chapter: bool = False) -> list[SegmentRecord]:
    """Deterministic seeded shuffle, then round(N * ratio) records to train.

    With by_chapter, whole chapters go to train until the target count is
    reached (sizes then only approximate the ratio).
    """
    records = list(records)
    if not records:
        raise EmptyDatasetError("no records to split")
    if not 0 < ratio < 1:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    rng = random.Random(seed)
    n_train = round(len(records) * ratio)

    train_ids: set[str] = set()
    if by_chapter:
        chapters: dict[str, list[str]] = {}
        for rec in records:
            chapters.setdefault(rec.chapter_id, []).append(rec.id)
        order = sorted(chapters)
        rng.shuffle(order)
        count = 0
        for chap in order:
            if count >= n_train:
                break
            train_ids.update(chapters[chap])
            count += len(chapters[chap])
    else:
        order = list(range(len(records)))
        rng.shuffle(order)
        train_ids = {records[i].id for i in order[:n_train]}

    return [replace(r, split=SPLIT_TRAIN if r.id in train_ids else SPLIT_TEST)
            for r in records]


def record_to_manifest_dict(rec: SegmentRecord) -> dict:
    d = {
        "audio_start_sec": rec.audio_start_sec,
        "audio_filepath": rec.audio_filepath,
        "duration": rec.duration,
        "text": rec.text,
        "normalized_text": rec.normalized_text,
        "uroman_tokens": rec.uroman_tokens,
        "x_word_count": rec.word_count,
        "x_char_count": rec.char_count,
        "x_word_rate": rec.word_rate,
        "x_char_rate": rec.char_rate,
        "x_quality_tag": rec.quality_tag,
        "x_split": rec.split,
        "x_id": rec.id,
    }
    d.update(dict(rec.extras))
    return d


def emit_manifest(records, path) -> None:
    """One JSON object per line; core fields use the standard manifest names."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for rec in records:
            f.write(json.dumps(record_to_manifest_dict(rec), ensure_ascii=False) + "\n")


def parse_manifest(path) -> list[SegmentRecord]:
    """Inverse of emit_manifest; unknown fields are preserved with a warning."""
    known = set(MANIFEST_CORE_FIELDS) | {
        "x_word_count", "x_char_count", "x_word_rate", "x_char_rate",
        "x_quality_tag", "x_split", "x_id"}
    records = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ManifestError(lineno, f"bad JSON: {e}") from None
            missing = [k for k in MANIFEST_CORE_FIELDS if k not in obj]
            if missing:
                raise ManifestError(lineno, f"missing fields: {', '.join(missing)}")
            extras = tuple((k, v) for k, v in obj.items() if k not in known)
            if extras:
                logger.warning("line %d: preserving unknown fields %s",
                               lineno, [k for k, _ in extras])
            try:
                records.append(SegmentRecord(
                    id=obj.get("x_id", f"segment_{lineno:06d}"),
                    audio_filepath=obj["audio_filepath"],
                    audio_start_sec=obj["audio_start_sec"],
                    duration=obj["duration"],
                    text=obj["text"],
                    normalized_text=obj["normalized_text"],
                    uroman_tokens=obj["uroman_tokens"],
                    word_count=obj.get("x_word_count", 0),
                    char_count=obj.get("x_char_count", 0),
                    word_rate=obj.get("x_word_rate", 0.0),
                    char_rate=obj.get("x_char_rate", 0.0),
                    quality_tag=obj.get("x_quality_tag", TAG_UNTAGGED),
                    split=obj.get("x_split", SPLIT_UNASSIGNED),
                    extras=extras,
                ))
            except InvalidRecordError as e:
                raise ManifestError(lineno, str(e)) from None
    return records


def emit_metadata_csv(records, path) -> None:
    """Columns: file_path, transcription, split, file_name."""
    for rec in records:
        if rec.split == SPLIT_UNASSIGNED:
            raise InvalidRecordError(f"{rec.id}: split not assigned")
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["file_path", "transcription", "split", "file_name"])
        for rec in records:
            writer.writerow([rec.audio_filepath, rec.text, rec.split,
                             os.path.basename(rec.audio_filepath)])


def parse_metadata_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def synth_path(tokens, frames_per_token: int, blank_index: int = 0) -> list[int]:
    """Canonical frame-level symbol path: each token held frames_per_token
    frames, with one blank frame separating equal neighbours."""
    if frames_per_token < 1:
        raise ValueError("frames_per_token must be >= 1")
    path: list[int] = []
    prev = None
    for tok in tokens:
        if tok == prev:
            path.append(blank_index)
        path.extend([tok] * frames_per_token)
        prev = tok
    return path


def synth_emissions(text: str, vocab: Vocab, frames_per_token: int = 2,
                    frame_duration: float = 0.02,
                    eps: float = 1e-8) -> LogProbMatrix:
    """Near-one-hot emissions tracing the canonical path of the encoded text.

    greedy_decode recovers the text exactly and forced_align reproduces
    the construction, so this serves as an end-to-end oracle generator.
    """
    tokens = encode_labels(text, vocab)
    path = synth_path(tokens, frames_per_token, vocab.blank_index)
    v = len(vocab)
    values = np.full((len(path), v), math.log(eps))
    hot = math.log(1.0 - (v - 1) * eps)
    for t, sym in enumerate(path):
        values[t, sym] = hot
    return LogProbMatrix(values, frame_duration=frame_duration,
                         blank_index=vocab.blank_index, tokens=vocab.tokens)
