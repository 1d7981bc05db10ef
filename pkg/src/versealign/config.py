"""Key-value configuration file support.

Format: one `key = value` per line, `#` starts a comment, blank lines
ignored. Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields


@dataclass
class Config:
    frame_duration: float = 0.02
    frames_per_token: int = 2
    wildcard: bool = False
    wildcard_logprob: float = math.log(0.5)
    target_dbfs: float = -1.0
    min_duration: float = 1.0
    max_duration: float = 30.0
    min_word_rate: float = 0.4
    max_word_rate: float = 6.0
    min_char_rate: float = 2.0
    max_char_rate: float = 30.0
    require_tag_high: bool = False
    split_ratio: float = 0.8
    split_by_chapter: bool = False
    seed: int = 0
    review_port: int = 8517


class ConfigError(ValueError):
    pass


def _coerce(name: str, kind: type, raw: str):
    raw = raw.strip()
    if kind is bool:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"{name}: expected true/false, got {raw!r}")
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{name}: expected {kind.__name__}, got {raw!r}") from None


def load_config(path) -> Config:
    types = {f.name: type(f.default) for f in fields(Config)}
    values = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'key = value'")
            key, raw = (part.strip() for part in line.split("=", 1))
            if key not in types:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            values[key] = _coerce(key, types[key], raw)
    return Config(**values)
