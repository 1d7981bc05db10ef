"""WAV ingestion, mono 16 kHz conversion, amplitude normalization, cutting.

Own RIFF parser instead of the stdlib ``wave`` module: we need float32
support and byte-offset error reporting for malformed headers.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.signal import resample_poly

TARGET_RATE = 16000


class WavParseError(ValueError):
    """Malformed RIFF/WAVE structure; carries the offending byte offset."""

    def __init__(self, offset: int, message: str):
        super().__init__(f"byte {offset}: {message}")
        self.offset = offset


class UnsupportedFormatError(ValueError):
    pass


class SpanOutOfRangeError(ValueError):
    pass


@dataclass(frozen=True)
class AudioBuffer:
    """Interleaved samples in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int
    channels: int = 1

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.channels < 1:
            raise ValueError("channels must be >= 1")
        if samples.size % self.channels:
            raise ValueError("sample count not divisible by channel count")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def num_frames(self) -> int:
        return self.samples.size // self.channels

    @property
    def duration(self) -> float:
        return self.num_frames / self.sample_rate


def load_wav(path) -> AudioBuffer:
    """Read a RIFF/WAVE file holding 16-bit PCM or 32-bit float samples.

    16-bit samples are scaled by 1/32768, so -32768 maps to exactly -1.0.
    """
    with open(path, "rb") as f:
        data = f.read()
    if str(path).lower().endswith(".mp3") or data[:3] == b"ID3" or data[:2] == b"\xff\xfb":
        raise UnsupportedFormatError(
            f"{path} looks like MP3; convert to WAV first (e.g. ffmpeg -i in.mp3 out.wav)")
    if len(data) < 12:
        raise WavParseError(0, "file too short for a RIFF header")
    if data[0:4] != b"RIFF":
        raise WavParseError(0, f"expected 'RIFF', found {data[0:4]!r}")
    if data[8:12] != b"WAVE":
        raise WavParseError(8, f"expected 'WAVE', found {data[8:12]!r}")

    fmt = None
    pcm_bytes = None
    offset = 12
    while offset + 8 <= len(data):
        chunk_id = data[offset:offset + 4]
        (chunk_size,) = struct.unpack_from("<I", data, offset + 4)
        body = data[offset + 8:offset + 8 + chunk_size]
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                raise WavParseError(offset, f"fmt chunk too small ({chunk_size} bytes)")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            pcm_bytes = body
        offset += 8 + chunk_size + (chunk_size & 1)
    if fmt is None:
        raise WavParseError(12, "missing fmt chunk")
    if pcm_bytes is None:
        raise WavParseError(12, "missing data chunk")

    audio_format, channels, sample_rate, _, _, bits = fmt
    if audio_format == 1 and bits == 16:
        raw = np.frombuffer(pcm_bytes[:len(pcm_bytes) // 2 * 2], dtype="<i2")
        samples = raw.astype(np.float64) / 32768.0
    elif audio_format == 3 and bits == 32:
        raw = np.frombuffer(pcm_bytes[:len(pcm_bytes) // 4 * 4], dtype="<f4")
        samples = raw.astype(np.float64)
    else:
        raise UnsupportedFormatError(
            f"unsupported encoding (format={audio_format}, bits={bits}); "
            "only PCM-16 and float-32 are readable")
    samples = samples[:samples.size // channels * channels]
    return AudioBuffer(samples, sample_rate, channels)


def save_wav(path, buf: AudioBuffer) -> None:
    """Write 16-bit PCM little-endian."""
    clipped = np.clip(buf.samples, -1.0, 1.0)
    pcm = np.round(clipped * 32767.0).astype("<i2").tobytes()
    byte_rate = buf.sample_rate * buf.channels * 2
    header = b"RIFF" + struct.pack("<I", 36 + len(pcm)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, 1, buf.channels,
                                    buf.sample_rate, byte_rate, buf.channels * 2, 16)
    header += b"data" + struct.pack("<I", len(pcm))
    with open(path, "wb") as f:
        f.write(header + pcm)


def to_mono_16k(buf: AudioBuffer) -> AudioBuffer:
    """Average channels, then polyphase-resample (Kaiser window) to 16 kHz."""
    if buf.channels == 1 and buf.sample_rate == TARGET_RATE:
        return buf
    mono = buf.samples.reshape(-1, buf.channels).mean(axis=1)
    if buf.sample_rate != TARGET_RATE:
        ratio = Fraction(TARGET_RATE, buf.sample_rate)
        mono = resample_poly(mono, ratio.numerator, ratio.denominator,
                             window=("kaiser", 5.0))
    return AudioBuffer(mono, TARGET_RATE, 1)


def peak_normalize(buf: AudioBuffer, target_dbfs: float = -1.0) -> AudioBuffer:
    """Scale so the peak hits 10^(target_dbfs/20); silence passes through."""
    peak = float(np.max(np.abs(buf.samples))) if buf.samples.size else 0.0
    if peak == 0.0:
        return buf
    target = 10.0 ** (target_dbfs / 20.0)
    return AudioBuffer(buf.samples * (target / peak), buf.sample_rate, buf.channels)


def cut_segment(buf: AudioBuffer, start_frame: int, end_frame: int,
                frame_duration: float) -> AudioBuffer:
    """Extract the samples covered by [start_frame, end_frame) lattice frames."""
    if buf.channels != 1 or buf.sample_rate != TARGET_RATE:
        raise ValueError("cut_segment expects mono 16 kHz audio")
    if not 0 <= start_frame < end_frame:
        raise SpanOutOfRangeError(f"bad span [{start_frame}, {end_frame})")
    end_time = end_frame * frame_duration
    # allow the final frame to overhang the buffer by one frame at most
    if end_time > buf.duration + frame_duration + 1e-9:
        raise SpanOutOfRangeError(
            f"span ends at {end_time:.3f}s but audio lasts {buf.duration:.3f}s")
    start = min(round(start_frame * frame_duration * TARGET_RATE), buf.samples.size)
    end = min(round(end_time * TARGET_RATE), buf.samples.size)
    return AudioBuffer(buf.samples[start:end], TARGET_RATE, 1)
