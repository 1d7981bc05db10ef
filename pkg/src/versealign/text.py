"""Transcript normalization, simplified romanization, and label encoding.

Tokenization works on grapheme clusters (base character plus trailing
combining marks) so that diacritic-heavy orthographies keep one symbol
per perceived letter.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass

BLANK_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
WORD_DELIMITER = "|"
RESERVED_TOKENS = (BLANK_TOKEN, UNK_TOKEN, WORD_DELIMITER)

# Unicode punctuation categories plus symbol characters we also strip.
_EXTRA_STRIP = set(":;!?()[]\"'")


class EmptyCorpusError(ValueError):
    pass


def grapheme_clusters(text: str) -> list[str]:
    """Split into base characters with their trailing combining marks."""
    clusters: list[str] = []
    for ch in text:
        if clusters and unicodedata.combining(ch):
            clusters[-1] += ch
        else:
            clusters.append(ch)
    return clusters


def _strip_char(ch: str) -> bool:
    return (unicodedata.category(ch).startswith("P")
            or unicodedata.category(ch) == "Nd"
            or ch in _EXTRA_STRIP)


def normalize_line(raw: str) -> str:
    """Lowercase, drop punctuation and digits, collapse whitespace. Idempotent."""
    kept = "".join(" " if ch.isspace() else ch
                   for ch in raw.lower() if not _strip_char(ch))
    return " ".join(kept.split())


def normalize_corpus(lines: list[str]) -> list[str]:
    """Normalize every line, dropping empties and exact duplicates."""
    seen: set[str] = set()
    out: list[str] = []
    for line in lines:
        norm = normalize_line(line)
        if norm and norm not in seen:
            seen.add(norm)
            out.append(norm)
    return out


def romanize(text: str, overrides: dict[str, str] | None = None) -> str:
    """Strip diacritics and emit space-separated single characters.

    A space in the input becomes the word delimiter token. Characters that
    are still non-ASCII after decomposition go through the override table;
    without an entry they pass through unchanged.
    """
    overrides = overrides or {}
    decomposed = unicodedata.normalize("NFD", text)
    stripped = "".join(ch for ch in decomposed if not unicodedata.combining(ch))
    out = []
    for ch in stripped:
        if ch == " ":
            out.append(WORD_DELIMITER)
        elif ch in overrides:
            out.append(overrides[ch])
        else:
            out.append(ch)
    return " ".join(out)


def load_override_table(path) -> dict[str, str]:
    """Two-column tab-separated file: from<TAB>to."""
    table: dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            if "\t" not in line:
                raise ValueError(f"line {lineno}: expected 'from<TAB>to'")
            src, dst = line.split("\t", 1)
            table[src] = dst
    return table


@dataclass(frozen=True)
class Vocab:
    """Ordered token set with blank, unknown, and word delimiter reserved."""

    tokens: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.tokens[:3] != RESERVED_TOKENS:
            raise ValueError(f"first tokens must be {RESERVED_TOKENS}")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValueError("tokens must be unique")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def blank_index(self) -> int:
        return 0

    @property
    def unk_index(self) -> int:
        return 1

    @property
    def delimiter_index(self) -> int:
        return 2

    def index(self, token: str) -> int:
        return self._index.get(token, self.unk_index)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for token in self.tokens:
                f.write(token + "\n")

    @classmethod
    def load(cls, path) -> "Vocab":
        with open(path, encoding="utf-8") as f:
            return cls(tuple(line.rstrip("\n") for line in f if line.rstrip("\n")))


def build_vocab(corpus: list[str]) -> Vocab:
    """Reserved tokens plus the sorted unique grapheme clusters of the corpus."""
    if not corpus:
        raise EmptyCorpusError("cannot build a vocabulary from an empty corpus")
    clusters: set[str] = set()
    for line in corpus:
        clusters.update(c for c in grapheme_clusters(line) if c != " ")
    return Vocab(RESERVED_TOKENS + tuple(sorted(clusters)))


def encode_labels(text: str, vocab: Vocab) -> tuple[int, ...]:
    """One index per grapheme cluster; spaces map to the word delimiter."""
    out = []
    for cluster in grapheme_clusters(text):
        if cluster == " ":
            out.append(vocab.delimiter_index)
        else:
            out.append(vocab.index(cluster))
    return tuple(out)


def decode_labels(tokens, vocab: Vocab) -> str:
    """Inverse of encode_labels for known tokens; delimiter becomes a space."""
    parts = []
    for idx in tokens:
        if idx == vocab.delimiter_index:
            parts.append(" ")
        else:
            parts.append(vocab.tokens[idx])
    return "".join(parts)
